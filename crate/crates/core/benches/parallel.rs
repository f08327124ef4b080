//! Parallel against sequential execution of the data-parallel paths: the
//! oracle's labelling enumeration and a batch of corpus reductions.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qctl_core::benchgen::gen_reset;
use qctl_core::corpus::{corpus, CorpusParams};
use qctl_core::oracle::{mc_qctl_with, Environment, OracleConfig};
use qctl_core::par::Exec;
use qctl_core::qbf::decide;
use qctl_core::qctl::parse_qctl;
use qctl_core::reduce::{reduce, ReductionConfig, Strategy};

const MODES: [(&str, Exec); 2] = [
    ("parallel", Exec::Parallel),
    ("sequential", Exec::Sequential),
];

fn oracle_enumeration(c: &mut Criterion) {
    let inst = gen_reset(3, 4, 3).expect("valid parameters");
    let f = parse_qctl("exists p. (A G (p -> E X ~p) & E F p)").expect("valid formula");
    let env = Environment::default();
    let mut group = c.benchmark_group("oracle_labellings");
    group.sample_size(10);
    for (name, exec) in MODES {
        let cfg = OracleConfig {
            exec,
            ..OracleConfig::default()
        };
        group.bench_function(BenchmarkId::new(name, inst.kripke.num_states()), |b| {
            b.iter(|| mc_qctl_with(&inst.kripke, &f, &env, &cfg).expect("within budget"))
        });
    }
    group.finish();
}

fn corpus_batch(c: &mut Criterion) {
    let instances = corpus(7, 64, CorpusParams::default());
    let cfg = ReductionConfig::with_strategy(Strategy::Pnf);
    let mut group = c.benchmark_group("corpus_pnf_batch");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::new(name, instances.len()), |b| {
            b.iter(|| {
                exec.map(&instances, |i| {
                    let circuit = reduce(&i.kripke, i.kripke.init(), &i.formula, &cfg)
                        .expect("prenex corpus");
                    decide(&circuit, None).expect("closed circuit")
                })
            })
        });
    }
    group.finish();
}

criterion_group!(benches, oracle_enumeration, corpus_batch);
criterion_main!(benches);
