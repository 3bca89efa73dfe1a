//! Command dispatch.

use std::fmt::Write as _;
use std::path::Path;

use maxess_core::divform::indefiniteness_profile;
use maxess_core::helmholtz::{apriori_bounds_check, read_field, t_n, t_t, vector_potential, write_field, SpectralField, SpectralGrid};
use maxess_core::oracle::{sigma_min_sweep, sweep_to_csv, SweepOptions};
use maxess_core::spectrum::maxwell_essential_spectrum;
use maxess_core::symbol::{cylinder_symbol, essential_spectrum_constant, pencil_symbol, PencilSymbol, SpectrumSet};
use maxess_core::weyl::{infinity_sequence, verify_decay, weak_convergence_check, SingularSequenceSpec};
use maxess_core::{CoefficientField, Complex64, DomainSpec, Point};
use serde::Serialize;

use crate::config::{resolve, DivformParams, FieldSource, HelmholtzOperator, HelmholtzParams, Params, RunConfig, SpectrumParams, SweepParams, SymbolParams, WeylParams};
use crate::emit::Artifacts;
use crate::CliError;

pub struct Context<'a> {
    pub config: &'a RunConfig,
    pub base: &'a Path,
    pub seed: u64,
}

pub fn dispatch(ctx: &Context, params: &Params, field: &CoefficientField, out: &mut Artifacts) -> Result<(), CliError> {
    match params {
        Params::Spectrum(p) => spectrum(ctx, p, field, out),
        Params::Symbol(p) => symbol(ctx, p, field, out),
        Params::Divform(p) => divform(ctx, p, field, out),
        Params::Helmholtz(p) => helmholtz(ctx, p, out),
        Params::Weyl(p) => weyl(ctx, p, field, out),
        Params::Sweep(p) => sweep(ctx, p, field, out),
    }
}

/// `component,provenance,re,im` rows, infinite ranges clipped to `extent`.
pub fn sample_cloud(set: &SpectrumSet, per_component: usize, extent: f64) -> String {
    let mut s = String::from("component,provenance,re,im\n");
    for (i, c) in set.components.iter().enumerate() {
        let prov = c.provenance.map(|p| serde_json::to_value(p).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()).unwrap_or_default();
        for w in c.component.sample(per_component, extent) {
            let _ = writeln!(s, "{i},{prov},{:.16e},{:.16e}", w.re, w.im);
        }
    }
    s
}

fn spectrum(ctx: &Context, p: &SpectrumParams, field: &CoefficientField, out: &mut Artifacts) -> Result<(), CliError> {
    let domain = &ctx.config.domain;
    let samples = domain.interior_samples(p.samples, p.extent);
    let set = maxwell_essential_spectrum(field, domain, &samples, p.tolerance).map_err(|e| CliError::computation(e.to_string()))?;
    out.write_json("spectrum.json", &set)?;
    if ctx.config.output.samples_csv {
        out.write_bytes("spectrum_samples.csv", sample_cloud(&set, p.cloud_points, p.cloud_extent).as_bytes())?;
    }
    Ok(())
}

#[derive(Serialize)]
struct SymbolReport {
    omega: [f64; 2],
    xi: [f64; 3],
    /// Row-major `[re, im]` pairs.
    matrix: Vec<Vec<[f64; 2]>>,
    determinant: [f64; 2],
    closed_form_determinant: [f64; 2],
    kappa: [f64; 2],
    constant_spectrum: SpectrumSet,
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn symbol(ctx: &Context, p: &SymbolParams, field: &CoefficientField, out: &mut Artifacts) -> Result<(), CliError> {
    let omega = Complex64::new(p.omega[0], p.omega[1]);
    let inf = field.at_infinity;
    let s: PencilSymbol = match (&p.xi, &p.cylinder_mode, &ctx.config.domain) {
        (Some(xi), _, _) => pencil_symbol(omega, &Point::from(*xi), inf.eps0, inf.mu0, inf.sigma0),
        (None, Some(m), DomainSpec::Cylinder { l }) => cylinder_symbol(omega, (m.n[0], m.n[1]), m.xi, l[0], l[1], inf.eps0, inf.mu0, inf.sigma0),
        _ => unreachable!("validated"),
    };
    let constant = essential_spectrum_constant(&ctx.config.domain, inf.eps0, inf.mu0, inf.sigma0).map_err(|e| CliError::computation(e.to_string()))?;
    let report = SymbolReport {
        omega: p.omega,
        xi: s.xi.into(),
        matrix: (0..6).map(|i| (0..6).map(|j| pair(s.matrix[(i, j)])).collect()).collect(),
        determinant: pair(s.determinant()),
        closed_form_determinant: pair(s.closed_form_determinant()),
        kappa: pair(s.kappa),
        constant_spectrum: constant,
    };
    out.write_json("symbol.json", &report)?;
    if ctx.config.output.samples_csv {
        out.write_bytes("constant_spectrum_samples.csv", sample_cloud(&report.constant_spectrum, p.cloud_points, p.cloud_extent).as_bytes())?;
    }
    Ok(())
}

fn divform(ctx: &Context, p: &DivformParams, field: &CoefficientField, out: &mut Artifacts) -> Result<(), CliError> {
    let domain = &ctx.config.domain;
    let samples = domain.interior_samples(p.samples, p.extent);
    let profile = indefiniteness_profile(field, &samples, p.tolerance, !domain.is_bounded()).map_err(|e| CliError::computation(e.to_string()))?;
    out.write_json("divform.json", &profile.to_json())
}

fn helmholtz(ctx: &Context, p: &HelmholtzParams, out: &mut Artifacts) -> Result<(), CliError> {
    let domain = &ctx.config.domain;
    let comp = |e: maxess_core::helmholtz::HelmholtzError| CliError::computation(e.to_string());
    let f = match &p.field {
        FieldSource::File(path) => {
            let f = read_field(&resolve(ctx.base, path)).map_err(|e| CliError::validation("command_params.field", e.to_string()))?;
            if &f.grid.domain != domain {
                return Err(CliError::validation("command_params.field", format!("field sidecar domain {:?} differs from the configured domain", f.grid.domain)));
            }
            f
        }
        FieldSource::Random(r) => {
            let grid = SpectralGrid::for_domain(domain, r.periods, r.modes).map_err(|e| CliError::validation("command_params.field.random", e.to_string()))?;
            let parity = match (p.operator, p.bc) {
                (HelmholtzOperator::Potential, Some(bc)) => bc.f_parity(),
                (HelmholtzOperator::TT, _) => maxess_core::helmholtz::ProjectionVariant::Dirichlet.parity(),
                _ => maxess_core::helmholtz::ProjectionVariant::Full.parity(),
            };
            SpectralField::random_solenoidal(&grid, parity, ctx.seed)
        }
    };
    let result = match p.operator {
        HelmholtzOperator::Potential => vector_potential(&f, p.bc.expect("validated")).map_err(comp)?,
        HelmholtzOperator::TN => t_n(&f).map_err(comp)?,
        HelmholtzOperator::TT => t_t(&f).map_err(comp)?,
    };
    let mut summary = result.to_json();
    if p.operator == HelmholtzOperator::Potential {
        let report = apriori_bounds_check(&f, &result);
        summary["apriori"] = serde_json::json!({"modes_checked": report.modes_checked, "slack": report.slack, "passed": report.passed(), "violations": report.violations});
    }
    write_field(&out.path("psi.bin"), &result.psi).map_err(comp)?;
    out.record_existing("psi.bin")?;
    out.record_existing("psi.json")?;
    out.write_json("potential.json", &summary)
}

#[derive(Serialize)]
struct WeylReport<'a> {
    table: &'a maxess_core::weyl::DecayTable,
    final_over_initial: f64,
    weak: Vec<maxess_core::weyl::WeakSeries>,
    infinity: Option<maxess_core::weyl::InfinityTable>,
}

fn weyl(ctx: &Context, p: &WeylParams, field: &CoefficientField, out: &mut Artifacts) -> Result<(), CliError> {
    let comp = |e: maxess_core::weyl::WeylError| CliError::computation(e.to_string());
    let schedule = p.schedule.entries().map_err(|e| CliError::validation("command_params.schedule", e.to_string()))?;
    let x0 = Point::from(p.x0);
    if !ctx.config.domain.contains(&x0) {
        return Err(CliError::validation("command_params.x0", "must lie inside the domain".into()));
    }
    let table = verify_decay(field, p.nu, x0, &schedule, p.box_n).map_err(comp)?;
    let weak = if p.test_functions.is_empty() {
        Vec::new()
    } else {
        let spec = SingularSequenceSpec::new(x0, Point::from(table.theta), schedule.clone(), p.box_n).map_err(comp)?;
        weak_convergence_check(&spec, &p.test_functions).map_err(comp)?
    };
    let infinity = match &p.infinity {
        Some(inf) => {
            if ctx.config.domain.is_bounded() {
                return Err(CliError::validation("command_params.infinity", "needs an unbounded domain".into()));
            }
            Some(infinity_sequence(field, inf.n_max, &inf.radii).map_err(comp)?)
        }
        None => None,
    };
    out.write_bytes("decay.csv", table.to_csv().as_bytes())?;
    out.write_json("weyl.json", &WeylReport { table: &table, final_over_initial: table.final_over_initial(), weak, infinity })
}

fn sweep(ctx: &Context, p: &SweepParams, field: &CoefficientField, out: &mut Artifacts) -> Result<(), CliError> {
    let mut omegas: Vec<Complex64> = p.omegas.iter().map(|w| Complex64::new(w[0], w[1])).collect();
    if let Some(w) = &p.window {
        omegas.extend(w.samples());
    }
    let opts = SweepOptions { max_iterations: p.max_iterations, tolerance: p.tolerance, allow_dense: p.allow_dense, seed: ctx.seed };
    let rows = sigma_min_sweep(&ctx.config.domain, field, &omegas, &p.grid, &opts).map_err(|e| CliError::computation(e.to_string()))?;
    out.write_bytes("sweep.csv", sweep_to_csv(&rows).as_bytes())
}
