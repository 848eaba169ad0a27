#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    rlz_fuzz::checks::block_round_trip(data);
});
