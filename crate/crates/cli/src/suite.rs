//! Report builders behind the subcommands.

use std::time::Instant;

use arithlat::intersection::{self, TorusDirection};
use arithlat::lattice::{self, EnumerationLimits, LatticeElement, LatticeSpec};
use arithlat::liealg;
use arithlat::modring::{self, ModElement, Modulus};
use arithlat::qfield::{self, u0, u0_pow};
use arithlat::report::{Report, Status};
use arithlat::{Error, FieldElement, FieldMatrix, Result};
use serde_json::{json, Value};

pub fn units(generator: Option<&FieldElement>) -> Report {
    match generator {
        Some(g) => qfield::verify_generator_primitivity(g),
        None => qfield::verify_fundamental_unit(),
    }
}

pub fn nonsquares(m: Modulus) -> Result<Report> {
    let started = Instant::now();
    let squares = modring::all_squares(m)?;
    let a = ModElement::new([2, 0, 1, 0], m);
    let checked = [("-1", ModElement::minus_one(m)), ("2+x^2", a), ("-(2+x^2)", -a)];
    let rows: Vec<Value> = checked
        .iter()
        .map(|(name, e)| json!({ "element": name, "residue": e.to_string(), "square": squares.contains(e) }))
        .collect();
    let ok = checked.iter().all(|(_, e)| !squares.contains(e));
    Ok(Report::from_outcome("nonsquares", ok, Some(json!({ "squares": squares.len(), "checked": rows })))
        .with_params(json!({ "modulus": m.get() }))
        .timed(started))
}

pub fn power_orbit(u: &FieldElement, m: Modulus) -> Result<Report> {
    let started = Instant::now();
    let avoids = modring::no_power_hits_minus_one(u, m)?;
    let orbit = modring::power_orbit(&modring::reduce(u, m)?);
    let witness = json!({
        "order": orbit.len(),
        "orbit": orbit.iter().map(ToString::to_string).collect::<Vec<_>>(),
    });
    Ok(Report::from_outcome("power_orbit", avoids, Some(witness))
        .with_params(json!({ "element": u.to_string(), "modulus": m.get() }))
        .timed(started))
}

pub fn lie(n: usize) -> Result<Report> {
    let started = Instant::now();
    let relations = liealg::ad_relations(n)?;
    let normal = liealg::normal_coefficient_vanishes(n)?;
    let ok = relations.passed() && normal.passed();
    let witness = json!({
        "ad_relations": { "status": relations.status, "witness": relations.witness },
        "normal_coefficient": { "status": normal.status, "witness": normal.witness },
    });
    Ok(Report::from_outcome("lie", ok, Some(witness)).with_params(json!({ "n": n })).timed(started))
}

pub fn pipeline(gamma: &FieldMatrix, t: &FieldMatrix, n: usize, denom_bound: u64) -> Result<Report> {
    let started = Instant::now();
    let spec = LatticeSpec::new(n)?;
    check_size(gamma, n, "gamma")?;
    check_size(t, n, "t")?;
    let t = TorusDirection::new(t.clone())?;
    let res = intersection::sign_criterion(gamma, &t, &spec, denom_bound)?;
    let status = if res.is_same_positive() { Status::Pass } else { Status::Unresolved };
    Ok(Report::new("pipeline", status)
        .with_witness(res.to_json())
        .with_params(json!({ "n": n, "denom_bound": denom_bound }))
        .timed(started))
}

pub fn membership(g: &FieldMatrix) -> Result<Report> {
    let started = Instant::now();
    let spec = LatticeSpec::new(g.rows())?;
    let member = lattice::is_member(g, &spec)?;
    let hermitian = &(&g.transpose().tau() * spec.form()) * g == *spec.form();
    let witness = json!({
        "integral": g.is_integral(),
        "det": g.det()?.to_string(),
        "preserves_form": hermitian,
    });
    Ok(Report::from_outcome("membership", member, Some(witness))
        .with_params(json!({ "n": g.rows() }))
        .timed(started))
}

pub fn reduce(g: &FieldMatrix, m: Modulus) -> Result<Report> {
    let started = Instant::now();
    let r = lattice::reduce_matrix(g, m)?;
    let rows: Vec<Vec<String>> =
        (0..r.size()).map(|i| (0..r.size()).map(|j| r.get(i, j).to_string()).collect()).collect();
    let witness = json!({ "reduced": rows, "in_kernel": r.is_identity() });
    Ok(Report::new("reduce", Status::Pass)
        .with_witness(witness)
        .with_params(json!({ "n": g.rows(), "modulus": m.get() }))
        .timed(started))
}

pub fn solve_star(gamma: &FieldMatrix, t: &FieldMatrix, m: Option<Modulus>, invertible: bool) -> Result<Report> {
    let started = Instant::now();
    let t = TorusDirection::new(t.clone())?;
    let sys = intersection::build_star_system(gamma, &t)?;
    let basis = sys.solution_basis();
    let mut witness = json!({
        "dimension": basis.len(),
        "basis": basis.iter().map(FieldMatrix::to_json).collect::<Vec<_>>(),
    });
    let mut ok = !basis.is_empty();
    if let Some(m) = m {
        let res = intersection::solvable_mod(&sys, m, invertible)?;
        ok &= res.solvable;
        witness["mod"] = serde_json::to_value(&res).expect("serialisable");
    }
    Ok(Report::from_outcome("solve_star", ok, Some(witness))
        .with_params(json!({ "n": gamma.rows(), "modulus": m.map(Modulus::get), "require_invertible": invertible }))
        .timed(started))
}

pub fn enumerate(n: usize, limits: EnumerationLimits) -> Result<Report> {
    let started = Instant::now();
    let spec = LatticeSpec::new(n)?;
    let e = lattice::enumerate_members(&spec, limits)?;
    let status = if e.budget_exhausted { Status::BudgetExhausted } else { Status::Pass };
    let witness = json!({
        "count": e.members.len(),
        "nodes_visited": e.nodes_visited,
        "entry_candidates": e.entry_candidates,
        "members": e.members.iter().map(LatticeElement::to_json).collect::<Vec<_>>(),
    });
    Ok(Report::new("enumerate", status)
        .with_witness(witness)
        .with_params(json!({ "n": n, "limits": limits }))
        .timed(started))
}

pub fn distance(g: &FieldMatrix) -> Result<Report> {
    let started = Instant::now();
    let d = lattice::symmetric_space_distance(g)?;
    Ok(Report::new("distance", Status::Pass)
        .with_witness(json!({ "distance": d }))
        .with_params(json!({ "n": g.rows() }))
        .timed(started))
}

pub fn transversality(k: &FieldMatrix) -> Result<Report> {
    let started = Instant::now();
    let conj = liealg::conjugated_singular_vector(k)?;
    let dim = liealg::transversal_intersection_dim(k)?;
    let witness = json!({ "conjugated_u": conj.to_json(), "intersection_dim": dim });
    Ok(Report::from_outcome("transversality", dim == 0, Some(witness))
        .with_params(json!({ "n": k.rows() }))
        .timed(started))
}

fn check_size(g: &FieldMatrix, n: usize, name: &str) -> Result<()> {
    if g.rows() != n || g.cols() != n {
        return Err(Error::Shape(format!("{name} is {}x{}, expected {n}x{n}", g.rows(), g.cols())));
    }
    Ok(())
}

/// `γ = a₀·b₀` with `a₀ = diag(u₀⁻¹, u₀⁻¹, u₀²)` and
/// `b₀ = k₀·diag(u₀, u₀⁻¹, 1)·k₀ᵀ`.
pub fn constructed_gamma() -> FieldMatrix {
    let a0 = FieldMatrix::diag(&[u0_pow(-1), u0_pow(-1), u0_pow(2)]);
    let k = intersection::k0();
    let b0 = &(&k * &FieldMatrix::diag(&[u0(), u0_pow(-1), FieldElement::one()])) * &k.transpose();
    &a0 * &b0
}

fn generators(n: usize) -> Result<Report> {
    let started = Instant::now();
    let spec = LatticeSpec::new(n)?;
    let small = spec.smaller()?;
    let mut checked = 0usize;
    let mut bad = Vec::new();
    let mut candidates = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let mut e = vec![0i64; n];
                e[i] = 1;
                e[j] = -1;
                candidates.push(lattice::a_generator(&spec, &e)?);
            }
        }
    }
    for k in -2..=2 {
        candidates.push(lattice::b_generator(&spec, &LatticeElement::identity(&small), k)?);
    }
    for g in &candidates {
        checked += 1;
        if !lattice::is_member(g.matrix(), &spec)? {
            bad.push(g.matrix().to_json());
        }
    }
    let mut shear = FieldMatrix::identity(n);
    shear.set(0, 1, FieldElement::one());
    let shear_rejected = !lattice::is_member(&shear, &spec)?;
    let ok = bad.is_empty() && shear_rejected;
    Ok(Report::from_outcome(
        "generators",
        ok,
        Some(json!({ "checked": checked, "non_members": bad, "shear_rejected": shear_rejected })),
    )
    .with_params(json!({ "n": n }))
    .timed(started))
}

fn star_dimensions() -> Result<Report> {
    let started = Instant::now();
    let id = FieldMatrix::identity(3);
    let diag = TorusDirection::new(FieldMatrix::diag(&[1, 2, 3].map(FieldElement::from_int)))?;
    let d_diag = intersection::solution_dimension(&intersection::build_star_system(&id, &diag)?);
    let sys = intersection::build_star_system(&id, &intersection::default_torus_direction())?;
    let basis = sys.solution_basis();
    let scalar = basis.len() == 1 && basis[0] == id.scale(basis[0].get(0, 0));
    let ok = d_diag == 3 && scalar;
    Ok(Report::from_outcome(
        "star_dimensions",
        ok,
        Some(json!({ "diagonal_t": d_diag, "conjugated_t": basis.len(), "spanned_by_identity": scalar })),
    )
    .with_params(json!({ "n": 3 }))
    .timed(started))
}

fn mod_solvability() -> Result<Report> {
    let started = Instant::now();
    let sys = intersection::build_star_system(&constructed_gamma(), &intersection::default_torus_direction())?;
    let mut rows = Vec::new();
    let mut ok = true;
    for m in [2u64, 3, 4, 8, 9] {
        let r = intersection::solvable_mod(&sys, Modulus::new(m)?, true)?;
        ok &= r.solvable;
        rows.push(json!({ "modulus": m, "solvable": r.solvable, "found_by": r.found_by }));
    }
    Ok(Report::from_outcome("mod_solvability", ok, Some(json!(rows))).with_params(json!({ "n": 3 })).timed(started))
}

/// The lemma-by-lemma suite, in dependency order. The intersection checks
/// use the `n = 3` instance whatever `n` is.
pub fn all(n: usize) -> Vec<(&'static str, Result<Report>)> {
    let four = Modulus::new(4).expect("valid modulus");
    let t = intersection::default_torus_direction().matrix().clone();
    vec![
        ("fundamental unit u0", Ok(units(None))),
        ("non-squares mod 4", nonsquares(four)),
        ("u0^k never -1 mod 4", power_orbit(&u0(), four)),
        ("generators lie in the lattice", generators(n)),
        ("star system dimensions", star_dimensions()),
        ("transversality at k0", transversality(&intersection::k0())),
        ("sign criterion, gamma = a0 b0", pipeline(&constructed_gamma(), &t, 3, 1000)),
        ("sign criterion, gamma = I", pipeline(&FieldMatrix::identity(3), &t, 3, 1000)),
        ("solvability mod 2,3,4,8,9", mod_solvability()),
        ("ad relations and normal coefficient", lie(n)),
    ]
}
