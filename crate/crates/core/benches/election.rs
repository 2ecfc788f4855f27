use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qvote_core::protocol::PreparedElection;
use qvote_core::{BallotSpec, ElectionConfig, Rule, Schedule};

fn majority_config(machines: usize, schedule: Schedule) -> ElectionConfig {
    let rule = Rule::from_text("OR(AND(v1,v2), AND(v2,v3), AND(v1,v3))").unwrap();
    let ballots = vec![
        BallotSpec::probabilistic(0.6),
        BallotSpec::probabilistic(0.6),
        BallotSpec::probabilistic(0.3),
    ];
    let mut cfg = ElectionConfig::new(rule, 3, machines, ballots, 42);
    cfg.schedule = schedule;
    cfg
}

fn veto_config(voters: usize, machines: usize, schedule: Schedule) -> ElectionConfig {
    let ballots = vec![BallotSpec::probabilistic(0.9); voters];
    let mut cfg = ElectionConfig::new(Rule::Qlv, voters, machines, ballots, 7);
    cfg.schedule = schedule;
    cfg
}

fn bench_estimate(c: &mut Criterion) {
    let mut group = c.benchmark_group("estimate_majority");
    group.sample_size(20);
    for trials in [100u64, 1000] {
        for (label, schedule) in [("sequential", Schedule::Sequential), ("parallel", Schedule::Parallel)] {
            let prepared = PreparedElection::new(&majority_config(10, schedule)).unwrap();
            group.bench_with_input(BenchmarkId::new(label, trials), &trials, |b, &t| {
                b.iter(|| prepared.estimate(t).unwrap())
            });
        }
    }
    group.finish();
}

fn bench_election(c: &mut Criterion) {
    let mut group = c.benchmark_group("qlv_election");
    group.sample_size(20);
    for voters in [4usize, 16] {
        for (label, schedule) in [("sequential", Schedule::Sequential), ("parallel", Schedule::Parallel)] {
            let prepared = PreparedElection::new(&veto_config(voters, 256, schedule)).unwrap();
            group.bench_with_input(BenchmarkId::new(label, voters), &voters, |b, _| {
                b.iter(|| prepared.run_trial(0).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, bench_estimate, bench_election);
criterion_main!(benches);
