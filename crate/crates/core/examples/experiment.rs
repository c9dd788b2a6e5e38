//! A sweep run through the batch runner, writing CSV files.

use oppsched::annealer::AnnealSchedule;
use oppsched::experiment::{run, Command, ExperimentConfig, Overrides};

fn main() -> oppsched::Result<()> {
    let mut config = ExperimentConfig::from_json(
        r#"{
            "qos": { "buffer": 0, "ccon": 1, "theta_tar": 0.3, "epsilon": 0.02, "nu_d": 0.02 },
            "sweep": { "parameter": "epsilon", "values": [0.02, 0.04, 0.06, 0.08] },
            "seeds": [0, 1]
        }"#,
    )?;
    config.schedule = AnnealSchedule::quick(40, 60);
    let out = std::env::temp_dir().join("oppsched-experiment");
    let overrides = Overrides {
        out: Some(out.clone()),
        ..Overrides::default()
    };
    let result = run(Command::Sweep, config, &overrides)?;
    for s in &result.summary {
        println!("epsilon {:<5} mean {:.4} dB over {} seeds", s.value.unwrap_or(f64::NAN), s.ebn0_db_mean, s.seeds);
    }
    println!("{}", std::fs::read_to_string(out.join("results.csv"))?);
    Ok(())
}
