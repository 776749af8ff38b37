use moce::debias::{moce_fit, MoceOptions};
use moce::lasso::{cross_validate, default_lambda_grid, lambda_max};
use moce_cli::sim::{generate_dataset, replicate_rng, SimConfig};
use rand::RngCore;

#[derive(Default)]
struct Arm {
    z_sq_null: f64,
    cover_null: usize,
    n_null: usize,
    cover_sig: usize,
    n_sig: usize,
    se_null: f64,
    se_sig: f64,
    a_tilde: usize,
    ordering_ok: usize,
}

fn main() {
    let cfg = SimConfig { n: 200, p: 200, a: 3, replicates: 1, ..SimConfig::default() };
    let reps = 50usize;
    let cs = [4.0f64, 6.0, 8.0, 10.0, 12.0];
    let mut arms: Vec<Arm> = cs.iter().map(|_| Arm::default()).collect();
    for rep in 0..reps {
        let mut rng = replicate_rng(23, rep);
        let inst = generate_dataset(&cfg, &mut rng).unwrap();
        let ds = &inst.ds;
        let lmax = lambda_max(ds.x(), ds.y());
        let grid = default_lambda_grid(lmax, 100);
        let cv = cross_validate(ds.x(), ds.y(), &grid, 10, &mut rng).unwrap();
        let seed = rng.next_u64();
        let sqn = (cfg.n as f64).sqrt();
        for (k, &c) in cs.iter().enumerate() {
            let opts = MoceOptions { sizing_constant: c, ..MoceOptions::default() };
            let fit = moce_fit(ds, cv.lambda, &opts, seed).unwrap();
            let arm = &mut arms[k];
            let mut in_expanded = vec![false; cfg.p];
            for &j in &fit.expanded.indices {
                in_expanded[j] = true;
            }
            let mut min_var_exp = f64::INFINITY;
            let mut max_var_comp = 0.0f64;
            for (j, &v) in fit.variance_diag.iter().enumerate() {
                if in_expanded[j] {
                    min_var_exp = min_var_exp.min(v);
                } else {
                    max_var_comp = max_var_comp.max(v);
                }
            }
            if min_var_exp >= max_var_comp {
                arm.ordering_ok += 1;
            }
            for j in 0..cfg.p {
                let est = fit.beta_tilde[j] / sqn;
                let se = fit.se[j] / sqn;
                let z = (est - inst.beta_star[j]) / se;
                if inst.support.contains(&j) {
                    if z.abs() < 1.96 {
                        arm.cover_sig += 1;
                    }
                    arm.n_sig += 1;
                    arm.se_sig += se;
                } else {
                    arm.z_sq_null += z * z;
                    if z.abs() < 1.96 {
                        arm.cover_null += 1;
                    }
                    arm.n_null += 1;
                    arm.se_null += se;
                }
            }
            arm.a_tilde += fit.expanded.a_tilde;
        }
    }
    println!("arms over {reps} reps, lambda = cv");
    for (k, &c) in cs.iter().enumerate() {
        let a = &arms[k];
        println!(
            "C={c:4.1}  z^2null {:.3}  cp95null {:.4}  cp95sig {:.4}  ASEnull {:.4}  ASEsig {:.4}  a_tilde {:.1}  ordering {:.2}",
            a.z_sq_null / a.n_null as f64,
            a.cover_null as f64 / a.n_null as f64,
            a.cover_sig as f64 / a.n_sig as f64,
            a.se_null / a.n_null as f64,
            a.se_sig / a.n_sig as f64,
            a.a_tilde as f64 / reps as f64,
            a.ordering_ok as f64 / reps as f64,
        );
    }
}
