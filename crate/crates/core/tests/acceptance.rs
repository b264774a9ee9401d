//! One line per acceptance criterion; fails if any criterion does.

use probstrat::acceptance;

fn main() {
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let ids: Vec<usize> = if only.is_empty() { (1..=10).collect() } else { only };
    let mut failed = 0;
    for id in ids {
        let c = acceptance::run(id);
        println!("{c}");
        failed += !c.passed as usize;
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
