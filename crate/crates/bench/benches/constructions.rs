use criterion::{black_box, criterion_group, criterion_main, Criterion};
use symext::completion::completion;
use symext::equivalence::{find_equivalence, NameClass};
use symext::fixtures::{l2_system, p3, ssym, striv};
use symext::forcing::Forcer;
use symext::iteration::{product, two_step, SystemName};
use symext::suites::{forcing_inventory, rank_one_names};
use symext::symmetric::enumerate_hs;
use symext::Rel;

fn forcing(c: &mut Criterion) {
    let p = p3();
    let names = forcing_inventory(&p, &rank_one_names(&p), 1);
    c.bench_function("atomic forcing, all pairs over P3", |b| {
        b.iter(|| {
            let mut f = Forcer::new(&p);
            let mut n = 0u32;
            for x in &names {
                for y in &names {
                    n += f.forcing_set(Rel::Eq, x, y).count_ones();
                }
            }
            black_box(n)
        })
    });
}

fn constructions(c: &mut Criterion) {
    c.bench_function("two-step Ssym * check(Ssym)", |b| {
        let s = ssym();
        b.iter(|| two_step(&s, &SystemName::check(&s, &s)).unwrap())
    });
    c.bench_function("product Striv x Striv", |b| b.iter(|| product(&striv(), &striv()).unwrap()));
    c.bench_function("completion of L2 at rank 2", |b| {
        let s = l2_system();
        b.iter(|| completion(&s, 2).unwrap())
    });
    c.bench_function("HS names of Ssym at rank 2", |b| b.iter(|| enumerate_hs(&ssym(), 2).unwrap().len()));
    c.bench_function("HS equivalence search, L2 against Striv", |b| {
        let (l, s) = (l2_system(), striv());
        b.iter(|| find_equivalence(&l, &s, NameClass::Hs, 2).unwrap().is_some())
    });
}

criterion_group!(benches, forcing, constructions);
criterion_main!(benches);
