//! One complete run: adaptive grid, snapshots, POD basis, reduced control.

use snaploc::pipeline::{run_algorithm1, ExperimentConfig, SnapshotSource};

fn main() -> snaploc::Result<()> {
    for snapshots in [SnapshotSource::Uncontrolled, SnapshotSource::CoarseOptimal] {
        let cfg = ExperimentConfig { dof: 47, snapshots, ..ExperimentConfig::default() };
        let report = run_algorithm1(&cfg)?;
        println!("{snapshots:?}:");
        for (k, v) in report.summary() {
            println!("  {k:>16}  {v}");
        }
    }
    Ok(())
}
