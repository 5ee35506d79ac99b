//! Prints mean generated/evaluated states per domain under the default
//! parameter ranges.
//!
//!     cargo run --release -p planbench-core --example calibrate -- [count] [seed]

use std::time::Instant;

use planbench::generators::{build_dataset, DatasetSpec, DomainId};

fn main() {
    let mut args = std::env::args().skip(1);
    let count: usize = args.next().map_or(500, |s| s.parse().expect("count"));
    let seed: u64 = args.next().map_or(2024, |s| s.parse().expect("seed"));
    println!(
        "{:<12} {:>10} {:>10} {:>8} {:>8} {:>8}",
        "domain", "generated", "evaluated", "len", "class", "secs"
    );
    let mut prev: Option<f64> = None;
    for domain in [
        DomainId::Ferry,
        DomainId::Blocksworld,
        DomainId::Hanoi,
        DomainId::Miconic,
        DomainId::Driverlog,
        DomainId::Grippers,
    ] {
        let start = Instant::now();
        let ds = build_dataset(&DatasetSpec::new(domain, count, seed)).expect("dataset");
        let m = &ds.manifest;
        let len = ds.records.iter().map(|r| r.plan_length as f64).sum::<f64>() / count as f64;
        let ratio = prev.map_or(String::new(), |p| format!("  x{:.2}", m.mean_generated / p));
        println!(
            "{:<12} {:>10.1} {:>10.1} {:>8.2} {:>8} {:>8.1}{ratio}",
            domain.as_str(),
            m.mean_generated,
            m.mean_evaluated,
            len,
            m.difficulty.to_string(),
            start.elapsed().as_secs_f64()
        );
        prev = Some(m.mean_generated);
    }
}
