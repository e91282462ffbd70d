#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let mut reader = std::io::BufReader::new(data);
    // the CSV decoder must reject malformed grids without panicking
    if let Ok(grid) = edgeworth::grid::GridDensity::read_csv(&mut reader) {
        let _ = grid.mass();
        let _ = grid.value_at(0.5);
    }
});
