use super::{CertError, CtpCertificate, GroupCertificate};
use crate::polycore::{build_basis, Monomial, Polynomial};
use crate::popmodel::PopInstance;

pub const IDENTITY_TOL: f64 = 1e-9;
pub const PROBE_TOL: f64 = 1e-8;

/// Outcome of [`verify_certificate`].
#[derive(Clone, Debug)]
pub struct VerifyReport {
    /// Largest coefficient mismatch of the polynomial identity over groups.
    pub identity_residual: f64,
    /// Largest |trace(P D_k(y) P) − a| / (1 + a) over probes and groups.
    pub probe_residual: f64,
    pub probes: usize,
}

/// Localised constraint lists of one group.
pub(crate) struct GroupPolys {
    pub n: usize,
    pub g: Vec<Polynomial>,
    pub h: Vec<Polynomial>,
}

pub(crate) fn group_polys(pop: &PopInstance, grp: &GroupCertificate) -> Result<GroupPolys, CertError> {
    let restrict = |p: &Polynomial, what: String| {
        p.restrict(&grp.variables).ok_or(CertError::Mismatch(format!("{} leaves the group's variables", what)))
    };
    let g = grp
        .ineq
        .iter()
        .map(|&i| pop.g.get(i).ok_or(CertError::Mismatch(format!("g{} missing", i + 1))).and_then(|p| restrict(p, format!("g{}", i + 1))))
        .collect::<Result<_, _>>()?;
    let h = grp
        .eq
        .iter()
        .map(|&j| pop.h.get(j).ok_or(CertError::Mismatch(format!("h{} missing", j + 1))).and_then(|p| restrict(p, format!("h{}", j + 1))))
        .collect::<Result<_, _>>()?;
    Ok(GroupPolys { n: grp.variables.len(), g, h })
}

/// σ₀ + Σ g_i σ_i + Σ h_j ψ_j for one group, in local variables.
pub(crate) fn group_identity(k: usize, polys: &GroupPolys, grp: &GroupCertificate) -> Result<Polynomial, CertError> {
    let n = polys.n;
    let gram = grp.gram();
    if gram.len() != polys.g.len() + 1 {
        return Err(CertError::Mismatch("block count differs from inequality count".into()));
    }
    let mut total = Polynomial::zero(n);
    for (b, diag) in gram.iter().enumerate() {
        let d = if b == 0 { k } else { k - polys.g[b - 1].half_ceil_degree() as usize };
        let basis = build_basis(n, d)?;
        if basis.len() != diag.len() {
            return Err(CertError::Mismatch(format!("block {} has {} entries, expected {}", b, diag.len(), basis.len())));
        }
        let sigma = Polynomial::from_terms(n, basis.monomials().iter().zip(diag).map(|(m, &c)| (m.doubled(), c)));
        total = total.add(&if b == 0 { sigma } else { polys.g[b - 1].mul(&sigma)? })?;
    }
    for (j, hj) in polys.h.iter().enumerate() {
        let Some(u) = grp.ideal.get(j) else { continue };
        if u.is_empty() {
            continue;
        }
        let basis = build_basis(n, 2 * (k - hj.half_ceil_degree() as usize))?;
        if basis.len() != u.len() {
            return Err(CertError::Mismatch(format!("multiplier of h{} has wrong length", j + 1)));
        }
        let psi = Polynomial::from_terms(n, basis.monomials().iter().cloned().zip(u.iter().copied()));
        total = total.add(&hj.mul(&psi)?)?;
    }
    Ok(total)
}

/// trace(P D_k(y) P) for y the Dirac moments at `z` (local variables):
/// Σ_α G0_α z^{2α} + Σ_i g_i(z) Σ_α G_iα z^{2α}.
pub(crate) fn dirac_trace(k: usize, polys: &GroupPolys, grp: &GroupCertificate, z: &[f64]) -> Result<f64, CertError> {
    let gram = grp.gram();
    let mut t = 0.0;
    for (b, diag) in gram.iter().enumerate() {
        let (d, w) = if b == 0 {
            (k, 1.0)
        } else {
            let g = &polys.g[b - 1];
            (k - g.half_ceil_degree() as usize, g.eval(z)?)
        };
        let basis = build_basis(polys.n, d)?;
        let s: f64 = basis.monomials().iter().zip(diag).map(|(m, c)| c * m.eval(z).powi(2)).sum();
        t += w * s;
    }
    Ok(t)
}

/// Checks the polynomial identity exactly (coefficient-wise) and the trace
/// identity on Dirac moment vectors at the given points. Points must lie
/// in V(h); any point works when there are no equalities.
pub fn verify_certificate(
    pop: &PopInstance,
    cert: &CtpCertificate,
    points: &[Vec<f64>],
) -> Result<VerifyReport, CertError> {
    let k = cert.order;
    let mut worst_id: f64 = 0.0;
    let mut worst_probe: f64 = 0.0;
    for (gi, grp) in cert.groups.iter().enumerate() {
        let polys = group_polys(pop, grp)?;
        let ident = group_identity(k, &polys, grp)?;
        let target = Polynomial::constant(polys.n, grp.trace);
        for (m, _) in ident.terms().chain(target.terms()) {
            let diff = (ident.coeff(m) - target.coeff(m)).abs();
            if diff > worst_id {
                worst_id = diff;
            }
            if diff > IDENTITY_TOL {
                return Err(CertError::Invalid(format!(
                    "group {}: identity fails at monomial {} by {:.3e}",
                    gi + 1,
                    Monomial::extend(m, pop.n, &grp.variables),
                    diff
                )));
            }
        }
        for (pi, z) in points.iter().enumerate() {
            if z.len() != pop.n {
                return Err(CertError::Mismatch(format!("probe point {} has wrong length", pi)));
            }
            let local: Vec<f64> = grp.variables.iter().map(|&v| z[v]).collect();
            let t = dirac_trace(k, &polys, grp, &local)?;
            let r = (t - grp.trace).abs() / (1.0 + grp.trace);
            worst_probe = worst_probe.max(r);
            if r > PROBE_TOL {
                return Err(CertError::Invalid(format!(
                    "group {}: probe {} gives trace {} instead of {}",
                    gi + 1,
                    pi,
                    t,
                    grp.trace
                )));
            }
        }
    }
    Ok(VerifyReport { identity_residual: worst_id, probe_residual: worst_probe, probes: points.len() })
}
