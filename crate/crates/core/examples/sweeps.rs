//! Temperature and confinement sweeps for two detectors, printed as CSV.

use pauli_blockade::observables::{sweep, ApertureAveraging, DetectionAxis, SweepSpec, SweepTable, SweepVariable};

fn print(table: &SweepTable) {
    println!("{}", table.columns.join(","));
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.5}")).collect();
        println!("{}", cells.join(","));
    }
}

fn main() -> pauli_blockade::Result<()> {
    let axes = vec![DetectionAxis::new(24.0, 0.23)?, DetectionAxis::new(72.0, 0.1)?];

    let temperature = SweepSpec {
        variable: SweepVariable::TOverTf,
        fixed: 0.93,
        grid: (0..7).map(|i| 0.1 + 0.1 * i as f64).collect(),
        axes: axes.clone(),
        averaging: ApertureAveraging::Central,
    };
    print(&sweep(&temperature)?);
    println!();

    // same detectors, but averaged over each collection cone
    let confinement = SweepSpec {
        variable: SweepVariable::KfOverKr,
        fixed: 0.13,
        grid: vec![0.57, 0.65, 0.73, 0.81, 0.89, 0.93],
        axes,
        averaging: ApertureAveraging::Cone,
    };
    print(&sweep(&confinement)?);
    Ok(())
}
