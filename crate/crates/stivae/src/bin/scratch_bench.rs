// Temporary benchmark for sizing the acceptance runs; not part of the deliverable.
use stivae::aux::{normalize_coords, radial_aux, Locations, ResolutionSpec};
use stivae::ivae::{train, IvaeConfig};
use stivae::metrics::mcc_of;
use stivae::simgen::{apply_mixing, gen_mixing, gen_setting};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let l: usize = args.get(1).map(|v| v.parse().unwrap()).unwrap_or(1);
    let epochs: usize = args.get(2).map(|v| v.parse().unwrap()).unwrap_or(60);
    let nseeds: u64 = args.get(3).map(|v| v.parse().unwrap()).unwrap_or(3);
    let (n_s, n_t, p, s_dim) = (50, 100, 3, 5);
    let mut mccs = Vec::new();
    for seed in 0..nseeds {
        let t0 = std::time::Instant::now();
        let (z, loc) = gen_setting(1, n_s, n_t, p, seed).unwrap();
        let f = gen_mixing(l, p, s_dim, stivae::seed::derive(seed, "mixing")).unwrap();
        let x = apply_mixing(&f, &z).unwrap();

        let (_, norm) = normalize_coords(&loc).unwrap();
        let coords_norm = norm.transform(&loc).unwrap();
        let nloc = Locations::new(
            coords_norm.slice(ndarray::s![.., 0..2]).to_owned(),
            coords_norm.column(2).to_owned(),
        )
        .unwrap();
        let spec = ResolutionSpec::standard();
        let aux = radial_aux(&nloc, &spec).unwrap();
        let gen_time = t0.elapsed();

        let t1 = std::time::Instant::now();
        let mut cfg = IvaeConfig::new(p);
        cfg.seed = seed;
        cfg.epochs = epochs;
        let (_, res) = train(&x, &aux.values, &cfg).unwrap();
        let train_time = t1.elapsed();

        let m = mcc_of(&z, &res.sources).unwrap();
        mccs.push(m);
        // linear demixing upper bound: OLS fit of each z_i on x (with intercept)
        let lin = linear_baseline(&z, &x);
        let h = &res.elbo_history;
        let idx: Vec<usize> = (0..h.len()).step_by((h.len()/8).max(1)).collect();
        let traj: Vec<String> = idx.iter().map(|&i| format!("{}:{:.2}", i, h[i])).collect();
        println!("  elbo trajectory: {}", traj.join(" "));
        println!(
            "seed {seed}: gen {:.2?}, train {:.2?}, elbo[0]={:.3}, elbo[last]={:.3}, MCC={m:.4}, linMCC={lin:.4}",
            gen_time,
            train_time,
            res.elbo_history[0],
            res.elbo_history.last().unwrap()
        );
    }
    mccs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    println!("median MCC over {} seeds: {:.4}", mccs.len(), mccs[mccs.len() / 2]);
}

/// Best linear unmixing MCC: regress each true component on x by OLS and
/// score the fitted values.
fn linear_baseline(z: &ndarray::Array2<f64>, x: &ndarray::Array2<f64>) -> f64 {
    use ndarray::{Array2, Axis, concatenate};
    let n = x.nrows();
    let ones = Array2::ones((n, 1));
    let xd = concatenate![Axis(1), ones.view(), x.view()];
    // normal equations via cholesky
    let xtx = xd.t().dot(&xd);
    let l = stivae::simgen::cholesky(&xtx).unwrap();
    let xtz = xd.t().dot(z);
    // solve L L^T B = X^T Z column by column
    let k = xtx.nrows();
    let mut beta = Array2::zeros((k, z.ncols()));
    for c in 0..z.ncols() {
        let mut y = vec![0.0; k];
        for i in 0..k {
            let mut s = xtz[(i, c)];
            for j in 0..i { s -= l[(i, j)] * y[j]; }
            y[i] = s / l[(i, i)];
        }
        let mut b = vec![0.0; k];
        for i in (0..k).rev() {
            let mut s = y[i];
            for j in i+1..k { s -= l[(j, i)] * b[j]; }
            b[i] = s / l[(i, i)];
        }
        for i in 0..k { beta[(i, c)] = b[i]; }
    }
    let fitted = xd.dot(&beta);
    stivae::metrics::mcc_of(z, &fitted).unwrap()
}
