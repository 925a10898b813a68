//! Checks objective weights and beam geometry against the tuning constraints.

use dwa3d::dwa::{validate_beam, validate_weights, BeamParams, Limits, ObjectiveWeights};

fn main() {
    let limits = Limits::default();
    let beam = BeamParams::default();
    let candidates = [
        ("lateral", ObjectiveWeights::lateral()),
        ("vertical", ObjectiveWeights::vertical()),
        (
            "heading-heavy",
            ObjectiveWeights {
                alpha: 0.6,
                beta: 0.3,
                ..ObjectiveWeights::lateral()
            },
        ),
        (
            "speed-heavy",
            ObjectiveWeights {
                alpha: 0.2,
                beta: 0.4,
                gamma: 0.4,
                ..ObjectiveWeights::lateral()
            },
        ),
    ];
    for (name, w) in candidates {
        let report = validate_weights(&w, &limits, &beam, 1.0);
        println!("{name}: {}", if report.passed() { "PASS" } else { "FAIL" });
        print!("{report}");
    }

    let beam_report = validate_beam(&beam);
    println!(
        "\nbeam: usable {}, within recommended envelope {}",
        beam_report.usable(),
        beam_report.within_restrictions()
    );
    for c in &beam_report.restrictions {
        let mark = if c.passed { "ok" } else { "warning" };
        println!("  {mark}: {} ({:.3} vs {:.3})", c.description, c.lhs, c.rhs);
    }
}
