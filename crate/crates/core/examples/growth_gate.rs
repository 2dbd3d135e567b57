//! Whether `e^{C h(ε)^{-m}} = O(ε^{-p})` holds for the log and linear
//! schedules.

use gfkit::cauchy::check_h_condition;
use gfkit::gf::make_ladder;
use gfkit::mollifier::HSchedule;
use gfkit::Result;

fn main() -> Result<()> {
    let ladder = make_ladder(0.1, 0.5, 5)?;
    for schedule in [HSchedule::Log, HSchedule::Linear] {
        let r = check_h_condition(schedule, 2.0, 1, &ladder.values, 12)?;
        println!(
            "{} schedule, C = 2, m = 1: minimal p = {:?}",
            schedule.tag(),
            r.minimal_p
        );
        for row in r.rows.iter().take(4) {
            println!(
                "  p = {:>2}: slope {:+.6}, passes {}",
                row.p, row.slope, row.passes
            );
        }
    }
    Ok(())
}
