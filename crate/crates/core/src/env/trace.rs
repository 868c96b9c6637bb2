//! Line-per-step text records of a run, used as golden files.

use std::fmt::Write;

use super::StepResult;

/// One line: time, trades, terminations and payouts of a step.
///
/// `t=12 trades=[c0:A1<-AUC@5#j7] done=[j3@c1:tat=6] pay=[c1:AUC+1,c1:A0+0] auc=1`
pub fn format_step(r: &StepResult) -> String {
    let mut s = String::new();
    write!(s, "t={} trades=[", r.time).unwrap();
    for (i, t) in r.trades.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        write!(s, "c{}:A{}<-{}@{}#j{}", t.core, t.buyer, t.seller, t.price, t.offer.job_uid).unwrap();
    }
    s.push_str("] done=[");
    for (i, c) in r.completed.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        write!(s, "j{}@c{}:tat={}", c.uid, c.core, c.tat).unwrap();
    }
    s.push_str("] pay=[");
    for (i, p) in r.payouts.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        write!(s, "c{}:{}{:+}", p.core, p.participant, p.amount).unwrap();
    }
    write!(s, "] auc={}", r.auctioneer_income).unwrap();
    s
}
