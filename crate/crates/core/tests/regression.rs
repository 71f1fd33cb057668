//! Reference-table regression: after a joint calibration on the bundled
//! anchors, the model reproduces the remaining benchmark tables cell by
//! cell.

use freqshape::analysis::{
    self, calibrate, matched_nadir_anchors, pareto_calibration_anchors, CalibrationOptions,
};

#[test]
fn overestimate_sweep_reproduces_bundled_table() {
    let mut anchors = pareto_calibration_anchors();
    anchors.extend(matched_nadir_anchors());
    let rep = calibrate(&anchors, &CalibrationOptions::default()).unwrap();
    let p = rep.params;

    let b_grid: Vec<f64> = analysis::MISMATCH_C105_TABLE
        .iter()
        .filter(|row| row.rho == 0.9)
        .map(|row| row.b)
        .collect();
    let mut worst = 0.0f64;
    for rho in [0.9, 0.7, 0.5, 0.3] {
        let cells = analysis::mismatch_sweep(&p, rho, &[1.05], &b_grid, 4).unwrap();
        let refs = analysis::MISMATCH_C105_TABLE
            .iter()
            .filter(|row| row.rho == rho);
        for (cell, want) in cells.iter().zip(refs) {
            assert_eq!(cell.b, want.b);
            assert!(cell.stable, "rho = {rho}, b = {}", cell.b);
            let got = cell.nadir_mhz.unwrap();
            let rel = (got - want.nadir_mhz).abs() / want.nadir_mhz;
            worst = worst.max(rel);
            assert!(
                rel <= 0.01,
                "rho = {rho}, b = {}: {got} vs {} (rel {rel:.3e})",
                cell.b,
                want.nadir_mhz
            );
        }
    }
    println!("overestimate table: worst cell error {worst:.3e} over 28 cells");
}
