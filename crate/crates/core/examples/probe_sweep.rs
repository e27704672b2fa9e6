use cellprobe::bench::{run_experiment, ExperimentConfig, Family, StructureId};

fn main() {
    for lg in 8..=18 {
        let mut line = format!("lg n = {lg:2}:");
        for (s, b) in [(StructureId::ClassicFu, 64), (StructureId::Packed, 128)] {
            let cfg = ExperimentConfig { structure: s, family: Family::Random, n: 1 << lg, b, delta: 8, ops: 1 << 14, ..Default::default() };
            let r = run_experiment(&cfg).unwrap();
            line += &format!("  {s} reads/op {:.3} probes/op {:.3}", r.row.total_reads as f64 / r.num_ops as f64, r.row.amortized_per_op);
        }
        println!("{line}");
    }
}
