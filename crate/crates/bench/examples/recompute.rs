use ggm_core::harness::bench_recompute;

fn main() {
    let d = ggm_bench::uniform_dataset(2000, 4, 7).expect("synthetic data");
    let (records, _) =
        bench_recompute("synthetic", &d, &[0.1, 0.2, 0.3, 0.5], 5, 1).expect("benchmark");
    for r in records {
        println!(
            "{:.1}  fresh {:.4}  incremental {:.4}  counting {:.4}",
            r.fraction, r.fresh_mean, r.incremental_mean, r.counting_mean
        );
    }
}
