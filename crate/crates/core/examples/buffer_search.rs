//! Energy gained by buffering: smallest buffer reaching a target gain.

use oppsched::annealer::{buffer_search, AnnealSchedule};
use oppsched::channel::SystemConfig;
use oppsched::fsmc::QosSpec;

fn main() -> oppsched::Result<()> {
    let spec = QosSpec::homogeneous(0, 1, 0.3, None, 0.02);
    let found = buffer_search(&spec, &[0, 1, 2], 2.5, 0.01, &SystemConfig::default(), &AnnealSchedule::default(), 0)?;
    println!("{:>3} {:>10} {:>9} {:>9}", "B", "Eb/N0 dB", "gain dB", "gamma");
    for c in &found.table {
        println!("{:>3} {:>10.4} {:>9.3} {:>9.5}", c.buffer, c.energy_db, c.gain_db, c.gamma.unwrap_or(f64::NAN));
    }
    match found.buffer {
        Some(b) => println!("smallest buffer with a 2.5 dB gain: {b}"),
        None => println!("no buffer reaches 2.5 dB"),
    }
    Ok(())
}
