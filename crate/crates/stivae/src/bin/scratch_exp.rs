// Temporary experiment matrix for training-recipe decisions; not part of the deliverable.
use ndarray::s;
use stivae::aux::{
    normalize_coords, radial_aux, segment_aux, AxisSegments, Locations, ResolutionSpec, SegMode,
    SegmentationSpec,
};
use stivae::ivae::{train, IvaeConfig};
use stivae::metrics::mcc_of;
use stivae::simgen::{apply_mixing, gen_mixing, gen_setting};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let mode = args.get(1).cloned().unwrap_or_else(|| "radial".into());
    let l: usize = args.get(2).map(|v| v.parse().unwrap()).unwrap_or(3);
    let epochs: usize = args.get(3).map(|v| v.parse().unwrap()).unwrap_or(150);
    let batch: usize = args.get(4).map(|v| v.parse().unwrap()).unwrap_or(64);
    let nseeds: u64 = args.get(5).map(|v| v.parse().unwrap()).unwrap_or(3);
    let (n_s, n_t, p, s_dim) = (50, 100, 3, 5);

    let data_seed: u64 = std::env::var("DATA_SEED").ok().map(|v| v.parse().unwrap()).unwrap_or(u64::MAX);
    let mut mccs = Vec::new();
    for seed in 0..nseeds {
        let dseed = if data_seed != u64::MAX { data_seed } else { seed };
        let (z, loc) = gen_setting(1, n_s, n_t, p, dseed).unwrap();
        let f = gen_mixing(l, p, s_dim, stivae::seed::derive(dseed, "mixing")).unwrap();
        let x = apply_mixing(&f, &z).unwrap();

        let aux_values = match mode.as_str() {
            "seg" => {
                let spec = SegmentationSpec {
                    mode: SegMode::S2,
                    spatial: vec![AxisSegments::Count(4), AxisSegments::Count(4)],
                    time: AxisSegments::Count(n_t / 5),
                };
                segment_aux(&loc, &spec).unwrap().values
            }
            "s3true" => {
                // the exact generating cells: 15 spatio-temporal clusters
                use stivae::simgen::{setting1_params, voronoi_clusters};
                let params = setting1_params(p, seed);
                let sites = ndarray::Array2::from_shape_fn((n_s, 2), |(i, j)| loc.coords[(i, j)]);
                let clusters = voronoi_clusters(&sites, &params.centers);
                let mut v = ndarray::Array2::zeros((n_s * n_t, 15));
                for t in 1..=n_t {
                    let seg = ((t - 1) * 5 / n_t).min(4);
                    for i in 0..n_s {
                        v[((t - 1) * n_s + i, clusters[i] * 5 + seg)] = 1.0;
                    }
                }
                v
            }
            tag => {
                let (_, norm) = normalize_coords(&loc).unwrap();
                let cn = norm.transform(&loc).unwrap();
                let nloc = Locations::new(
                    cn.slice(s![.., 0..2]).to_owned(),
                    cn.column(2).to_owned(),
                )
                .unwrap();
                let mut spec = ResolutionSpec::standard();
                if tag == "radial17" {
                    spec.spatial_levels = vec![2, 9, 17];
                }
                radial_aux(&nloc, &spec).unwrap().values
            }
        };

        let t1 = std::time::Instant::now();
        let mut cfg = IvaeConfig::new(p);
        cfg.seed = seed;
        cfg.epochs = epochs;
        cfg.batch_size = batch;
        if let Ok(w) = std::env::var("WIDTH") {
            let w: usize = w.parse().unwrap();
            cfg.hidden = vec![w, w, w];
            cfg.aux_hidden = vec![w, w, w];
        }
        let (model, res) = train(&x, &aux_values, &cfg).unwrap();
        let m = mcc_of(&z, &res.sources).unwrap();
        mccs.push(m);
        // decompose final elbo
        let xs = model.standardize(&x).unwrap();
        let noise = ndarray::Array2::zeros((x.nrows(), p));
        let t = stivae::ivae::elbo_batch(&model, &x, &aux_values, &noise).unwrap();
        let _ = xs;
        println!(
            "mode={mode} L={l} epochs={epochs} batch={batch} seed={seed}: {:.1?} elbo={:.3} (recon {:.3} kl {:.3} at mean) MCC={m:.4}",
            t1.elapsed(),
            res.final_elbo.unwrap(),
            t.recon,
            t.kl,
        );
        println!("   baselines: fullOLS={:.4} whitenedP={:.4}", full_ols_baseline(&z, &x), whitened_p_baseline(&z, &x));
    }
    mccs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    println!(
        "=> mode={mode} L={l} median MCC {:.4}",
        mccs[mccs.len() / 2]
    );
}

fn solve_spd(a: &ndarray::Array2<f64>, b: &ndarray::Array2<f64>) -> ndarray::Array2<f64> {
    let l = stivae::simgen::cholesky(a).unwrap();
    let k = a.nrows();
    let mut out = ndarray::Array2::zeros((k, b.ncols()));
    for c in 0..b.ncols() {
        let mut y = vec![0.0; k];
        for i in 0..k {
            let mut s = b[(i, c)];
            for j in 0..i { s -= l[(i, j)] * y[j]; }
            y[i] = s / l[(i, i)];
        }
        let mut v = vec![0.0; k];
        for i in (0..k).rev() {
            let mut s = y[i];
            for j in i + 1..k { s -= l[(j, i)] * v[j]; }
            v[i] = s / l[(i, i)];
        }
        for i in 0..k { out[(i, c)] = v[i]; }
    }
    out
}

fn full_ols_baseline(z: &ndarray::Array2<f64>, x: &ndarray::Array2<f64>) -> f64 {
    use ndarray::{concatenate, Array2, Axis};
    let n = x.nrows();
    let ones = Array2::ones((n, 1));
    let xd = concatenate![Axis(1), ones.view(), x.view()];
    let beta = solve_spd(&xd.t().dot(&xd), &xd.t().dot(z));
    stivae::metrics::mcc_of(z, &xd.dot(&beta)).unwrap()
}

/// Whiten x to the top-P principal components, then the best linear map of
/// those components onto each true source (upper bound of whitening +
/// orthogonal rotation methods).
fn whitened_p_baseline(z: &ndarray::Array2<f64>, x: &ndarray::Array2<f64>) -> f64 {
    use ndarray::{concatenate, Array2, Axis};
    let n = x.nrows();
    let p = z.ncols();
    let means: Vec<f64> = x.columns().into_iter().map(|c| c.sum() / n as f64).collect();
    let mut xc = x.to_owned();
    for (j, mut col) in xc.columns_mut().into_iter().enumerate() {
        col.mapv_inplace(|v| v - means[j]);
    }
    let cov = xc.t().dot(&xc) / n as f64;
    // power iteration with deflation for top-P eigenvectors
    let s_dim = cov.nrows();
    let mut defl = cov.clone();
    let mut basis = Array2::zeros((s_dim, p));
    for c in 0..p {
        let mut v = ndarray::Array1::from_elem(s_dim, 1.0 / (s_dim as f64).sqrt());
        let mut lam = 0.0;
        for _ in 0..500 {
            let w = defl.dot(&v);
            lam = w.dot(&w).sqrt();
            if lam == 0.0 { break; }
            v = w / lam;
        }
        for i in 0..s_dim { basis[(i, c)] = v[i]; }
        let outer = { let vc = v.clone().insert_axis(Axis(1)); vc.dot(&vc.clone().reversed_axes()) };
        defl = &defl - &outer.mapv(|t| t * lam);
    }
    let scores = xc.dot(&basis); // n x P
    let ones = Array2::ones((n, 1));
    let sd = concatenate![Axis(1), ones.view(), scores.view()];
    let beta = solve_spd(&sd.t().dot(&sd), &sd.t().dot(z));
    stivae::metrics::mcc_of(z, &sd.dot(&beta)).unwrap()
}
