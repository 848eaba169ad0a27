#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    rlz_fuzz::checks::decode_block(data);
});
