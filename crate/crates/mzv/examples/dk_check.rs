fn main() {
    let args: Vec<String> = std::env::args().collect();
    let k_max: u32 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(10);
    let t = std::time::Instant::now();
    for r in mzv::relations::kernel_chain(k_max) {
        println!("k={} rank={} d_k={} ({:?} cumulative)", r.weight, r.rank, r.d_k, t.elapsed());
    }
}
