use iqc_core::affine::VarId;
use iqc_core::lmi::sdpa::{read_sdpa, write_sdpa};
use iqc_core::lmi::{build_problem, k_circ, DEFAULT_EPS};
use iqc_core::model::{build_filter, build_interconnection, chatter, example_tds};
use iqc_core::multipliers::MultiplierSet;

#[test]
fn chatter_problem_round_trips_through_sdpa() {
    let (a, b) = chatter(2.0);
    let (plant, pde) = example_tds(&a, &b, 0.4).unwrap();
    let filt = build_filter(&pde, 1).unwrap();
    let sys = build_interconnection(&plant, &filt, &pde.output).unwrap();
    let mult = MultiplierSet::transport(1, 4, 2.5, VarId(1), VarId(2)).unwrap();
    let kc = k_circ(&pde, &plant, filt.n_xi).unwrap();
    let problem = build_problem(&sys, &mult, &kc, DEFAULT_EPS).unwrap();

    let mut buf = Vec::new();
    write_sdpa(&problem, &mut buf).unwrap();
    let data = read_sdpa(std::str::from_utf8(&buf).unwrap()).unwrap();
    // P: 12×12, S and R: 4×4, plus the margin
    let m = 12 * 13 / 2 + 2 * 10 + 1;
    assert_eq!(data.c.len(), m);
    assert_eq!(data.c[m - 1], -1.0);
    // S, R, kernel, positivity, trace bound
    assert_eq!(data.block_dims, vec![4, 4, 16, 12, 1]);
    for f in &data.matrices {
        for blk in f {
            assert_eq!(blk, &blk.transpose());
        }
    }
    // the margin enters every LMI block as −I and not the trace bound
    let t = &data.matrices[m];
    for (k, &d) in data.block_dims.iter().enumerate().take(4) {
        assert_eq!(t[k], -iqc_core::linalg::Mat::identity(d, d));
    }
    assert_eq!(t[4][(0, 0)], 0.0);
}
