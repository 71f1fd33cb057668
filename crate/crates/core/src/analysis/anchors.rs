//! Bundled reference tables used by the regression suite and exposed
//! through the CLI `--quote-figure` flag, so acceptance runs need no
//! external data files.
//!
//! All values are for a 1 p.u. load step on the benchmark two-bus system;
//! nadirs are magnitudes in mHz, powers in p.u.

use super::calibrate::Anchor;

/// Trade-off anchor: design rho (None = no inverter), nadir, peak power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParetoAnchorRow {
    pub rho: Option<f64>,
    pub nadir_mhz: f64,
    pub peak_pu: f64,
}

/// Marked points of the benchmark nadir/peak-power trade-off.
pub const PARETO_ANCHOR_TABLE: [ParetoAnchorRow; 5] = [
    ParetoAnchorRow {
        rho: None,
        nadir_mhz: 424.177710580167,
        peak_pu: 0.0,
    },
    ParetoAnchorRow {
        rho: Some(0.8),
        nadir_mhz: 389.18896868097,
        peak_pu: 0.135018331344184,
    },
    ParetoAnchorRow {
        rho: Some(0.6),
        nadir_mhz: 348.972412047316,
        peak_pu: 0.27558446625031,
    },
    ParetoAnchorRow {
        rho: Some(0.4),
        nadir_mhz: 300.758677900104,
        peak_pu: 0.418307175705351,
    },
    ParetoAnchorRow {
        rho: Some(0.2),
        nadir_mhz: 237.099422510742,
        peak_pu: 0.545341275691656,
    },
];

/// Matched-estimate (c = 1) nadir for one rho.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchedNadirRow {
    pub rho: f64,
    pub nadir_mhz: f64,
}

/// Matched-estimate nadirs at several rho values on the benchmark system.
pub const MATCHED_NADIR_TABLE: [MatchedNadirRow; 4] = [
    MatchedNadirRow {
        rho: 0.9,
        nadir_mhz: 407.491702125468,
    },
    MatchedNadirRow {
        rho: 0.7,
        nadir_mhz: 370.204252215207,
    },
    MatchedNadirRow {
        rho: 0.5,
        nadir_mhz: 326.830556963332,
    },
    MatchedNadirRow {
        rho: 0.3,
        nadir_mhz: 274.299239329325,
    },
];

/// Mismatch sweep cell at rho = 0.7: estimate factor c, true susceptance b,
/// resulting nadir.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MismatchSweepRow {
    pub c: f64,
    pub b: f64,
    pub nadir_mhz: f64,
}

/// Benchmark mismatch sweep at rho = 0.7 s with b_hat = c*b.
pub const MISMATCH_RHO07_TABLE: [MismatchSweepRow; 35] = [
    MismatchSweepRow {
        c: 1.0,
        b: 0.001,
        nadir_mhz: 370.204252215207,
    },
    MismatchSweepRow {
        c: 1.0,
        b: 0.01,
        nadir_mhz: 370.204252215207,
    },
    MismatchSweepRow {
        c: 1.0,
        b: 0.1,
        nadir_mhz: 370.204252215207,
    },
    MismatchSweepRow {
        c: 1.0,
        b: 1.0,
        nadir_mhz: 370.204252215207,
    },
    MismatchSweepRow {
        c: 1.0,
        b: 10.0,
        nadir_mhz: 370.204252215207,
    },
    MismatchSweepRow {
        c: 1.0,
        b: 100.0,
        nadir_mhz: 370.204252215207,
    },
    MismatchSweepRow {
        c: 1.0,
        b: 1000.0,
        nadir_mhz: 370.204252215207,
    },
    MismatchSweepRow {
        c: 1.01,
        b: 0.001,
        nadir_mhz: 424.177150961324,
    },
    MismatchSweepRow {
        c: 1.01,
        b: 0.01,
        nadir_mhz: 423.203539025587,
    },
    MismatchSweepRow {
        c: 1.01,
        b: 0.1,
        nadir_mhz: 415.532000209311,
    },
    MismatchSweepRow {
        c: 1.01,
        b: 1.0,
        nadir_mhz: 388.55385949399,
    },
    MismatchSweepRow {
        c: 1.01,
        b: 10.0,
        nadir_mhz: 372.734234605693,
    },
    MismatchSweepRow {
        c: 1.01,
        b: 100.0,
        nadir_mhz: 370.467833852335,
    },
    MismatchSweepRow {
        c: 1.01,
        b: 1000.0,
        nadir_mhz: 370.230718709008,
    },
    MismatchSweepRow {
        c: 1.05,
        b: 0.001,
        nadir_mhz: 424.264213261478,
    },
    MismatchSweepRow {
        c: 1.05,
        b: 0.01,
        nadir_mhz: 424.058891172688,
    },
    MismatchSweepRow {
        c: 1.05,
        b: 0.1,
        nadir_mhz: 422.072789148691,
    },
    MismatchSweepRow {
        c: 1.05,
        b: 1.0,
        nadir_mhz: 408.739745000999,
    },
    MismatchSweepRow {
        c: 1.05,
        b: 10.0,
        nadir_mhz: 380.727516285262,
    },
    MismatchSweepRow {
        c: 1.05,
        b: 100.0,
        nadir_mhz: 371.45013184512,
    },
    MismatchSweepRow {
        c: 1.05,
        b: 1000.0,
        nadir_mhz: 370.331322668487,
    },
    MismatchSweepRow {
        c: 2.0,
        b: 0.001,
        nadir_mhz: 424.284923769715,
    },
    MismatchSweepRow {
        c: 2.0,
        b: 0.01,
        nadir_mhz: 424.265302970019,
    },
    MismatchSweepRow {
        c: 2.0,
        b: 0.1,
        nadir_mhz: 424.06972331703,
    },
    MismatchSweepRow {
        c: 2.0,
        b: 1.0,
        nadir_mhz: 422.17490585624,
    },
    MismatchSweepRow {
        c: 2.0,
        b: 10.0,
        nadir_mhz: 409.286798596004,
    },
    MismatchSweepRow {
        c: 2.0,
        b: 100.0,
        nadir_mhz: 381.164883145282,
    },
    MismatchSweepRow {
        c: 2.0,
        b: 1000.0,
        nadir_mhz: 371.510993210161,
    },
    MismatchSweepRow {
        c: 5.0,
        b: 0.001,
        nadir_mhz: 424.285741551711,
    },
    MismatchSweepRow {
        c: 5.0,
        b: 0.01,
        nadir_mhz: 424.273476910881,
    },
    MismatchSweepRow {
        c: 5.0,
        b: 0.1,
        nadir_mhz: 424.151076259716,
    },
    MismatchSweepRow {
        c: 5.0,
        b: 1.0,
        nadir_mhz: 422.951187096172,
    },
    MismatchSweepRow {
        c: 5.0,
        b: 10.0,
        nadir_mhz: 413.864514185686,
    },
    MismatchSweepRow {
        c: 5.0,
        b: 100.0,
        nadir_mhz: 386.013498186105,
    },
    MismatchSweepRow {
        c: 5.0,
        b: 1000.0,
        nadir_mhz: 372.266393687757,
    },
];

/// Mismatch sweep cell at a fixed 5% overestimate: design rho, true
/// susceptance b, resulting nadir.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhoMismatchRow {
    pub rho: f64,
    pub b: f64,
    pub nadir_mhz: f64,
}

/// Benchmark mismatch sweep with c = 1.05 across designs rho in
/// {0.9, 0.7, 0.5, 0.3}; the same seven-point susceptance grid as
/// [`MISMATCH_RHO07_TABLE`].
pub const MISMATCH_C105_TABLE: [RhoMismatchRow; 28] = [
    RhoMismatchRow {
        rho: 0.9,
        b: 0.001,
        nadir_mhz: 424.264232792861,
    },
    RhoMismatchRow {
        rho: 0.9,
        b: 0.01,
        nadir_mhz: 424.060818809786,
    },
    RhoMismatchRow {
        rho: 0.9,
        b: 0.1,
        nadir_mhz: 422.242716065556,
    },
    RhoMismatchRow {
        rho: 0.9,
        b: 1.0,
        nadir_mhz: 414.696563926664,
    },
    RhoMismatchRow {
        rho: 0.9,
        b: 10.0,
        nadir_mhz: 408.635403188877,
    },
    RhoMismatchRow {
        rho: 0.9,
        b: 100.0,
        nadir_mhz: 407.612584100144,
    },
    RhoMismatchRow {
        rho: 0.9,
        b: 1000.0,
        nadir_mhz: 407.503858110404,
    },
    RhoMismatchRow {
        rho: 0.7,
        b: 0.001,
        nadir_mhz: 424.264213261478,
    },
    RhoMismatchRow {
        rho: 0.7,
        b: 0.01,
        nadir_mhz: 424.058891172688,
    },
    RhoMismatchRow {
        rho: 0.7,
        b: 0.1,
        nadir_mhz: 422.072789148691,
    },
    RhoMismatchRow {
        rho: 0.7,
        b: 1.0,
        nadir_mhz: 408.739745000999,
    },
    RhoMismatchRow {
        rho: 0.7,
        b: 10.0,
        nadir_mhz: 380.727516285262,
    },
    RhoMismatchRow {
        rho: 0.7,
        b: 100.0,
        nadir_mhz: 371.45013184512,
    },
    RhoMismatchRow {
        rho: 0.7,
        b: 1000.0,
        nadir_mhz: 370.331322668487,
    },
    RhoMismatchRow {
        rho: 0.5,
        b: 0.001,
        nadir_mhz: 424.264209351358,
    },
    RhoMismatchRow {
        rho: 0.5,
        b: 0.01,
        nadir_mhz: 424.058501855388,
    },
    RhoMismatchRow {
        rho: 0.5,
        b: 0.1,
        nadir_mhz: 422.035494250636,
    },
    RhoMismatchRow {
        rho: 0.5,
        b: 1.0,
        nadir_mhz: 406.524772456741,
    },
    RhoMismatchRow {
        rho: 0.5,
        b: 10.0,
        nadir_mhz: 357.487944905099,
    },
    RhoMismatchRow {
        rho: 0.5,
        b: 100.0,
        nadir_mhz: 331.098666106028,
    },
    RhoMismatchRow {
        rho: 0.5,
        b: 1000.0,
        nadir_mhz: 327.271118829693,
    },
    RhoMismatchRow {
        rho: 0.3,
        b: 0.001,
        nadir_mhz: 424.2642076752,
    },
    RhoMismatchRow {
        rho: 0.3,
        b: 0.01,
        nadir_mhz: 424.058334614443,
    },
    RhoMismatchRow {
        rho: 0.3,
        b: 0.1,
        nadir_mhz: 422.019138632622,
    },
    RhoMismatchRow {
        rho: 0.3,
        b: 1.0,
        nadir_mhz: 405.371370239239,
    },
    RhoMismatchRow {
        rho: 0.3,
        b: 10.0,
        nadir_mhz: 338.104786185099,
    },
    RhoMismatchRow {
        rho: 0.3,
        b: 100.0,
        nadir_mhz: 284.577732294178,
    },
    RhoMismatchRow {
        rho: 0.3,
        b: 1000.0,
        nadir_mhz: 275.360561421446,
    },
];

/// The trade-off anchors as calibration inputs.
pub fn pareto_calibration_anchors() -> Vec<Anchor> {
    PARETO_ANCHOR_TABLE
        .iter()
        .map(|row| Anchor {
            rho: row.rho,
            nadir_mhz: row.nadir_mhz,
            peak_pu: Some(row.peak_pu),
        })
        .collect()
}

/// The matched-estimate nadirs as (peak-free) calibration inputs.
pub fn matched_nadir_anchors() -> Vec<Anchor> {
    MATCHED_NADIR_TABLE
        .iter()
        .map(|row| Anchor {
            rho: Some(row.rho),
            nadir_mhz: row.nadir_mhz,
            peak_pu: None,
        })
        .collect()
}

pub fn table_names() -> &'static [&'static str] {
    &["pareto", "mismatch-c1", "mismatch-rho07", "mismatch-c105"]
}

/// Render a named bundled table as CSV (with header row). `None` for an
/// unknown name.
pub fn quote_table(name: &str) -> Option<String> {
    match name {
        "pareto" => {
            let mut out = String::from("rho,nadir_mhz,peak_pu\n");
            for row in &PARETO_ANCHOR_TABLE {
                let rho = row
                    .rho
                    .map(|r| r.to_string())
                    .unwrap_or_else(|| "no_ibr".into());
                out.push_str(&format!("{rho},{},{}\n", row.nadir_mhz, row.peak_pu));
            }
            Some(out)
        }
        "mismatch-c1" => {
            let mut out = String::from("rho,nadir_mhz\n");
            for row in &MATCHED_NADIR_TABLE {
                out.push_str(&format!("{},{}\n", row.rho, row.nadir_mhz));
            }
            Some(out)
        }
        "mismatch-rho07" => {
            let mut out = String::from("c,b,nadir_mhz\n");
            for row in &MISMATCH_RHO07_TABLE {
                out.push_str(&format!("{},{},{}\n", row.c, row.b, row.nadir_mhz));
            }
            Some(out)
        }
        "mismatch-c105" => {
            let mut out = String::from("rho,b,nadir_mhz\n");
            for row in &MISMATCH_C105_TABLE {
                out.push_str(&format!("{},{},{}\n", row.rho, row.b, row.nadir_mhz));
            }
            Some(out)
        }
        _ => None,
    }
}
