//! End-to-end separability verdicts for invariant quantum states.
//!
//! The pipeline runs the cheap necessary tests first (PPT, realignment,
//! the full necessary battery), then the sufficient constructions, and
//! finally a catalog of positive covariant maps whose partial action can
//! expose PPT entanglement. Separability is not decidable in general, so
//! UNDECIDED is a first-class outcome and the pipeline never guesses.

use serde::{Deserialize, Serialize};

use crate::cones::{
    ppt_test, psd_test, realignment_test, tcp_certify, tcp_necessary_battery, verify_tcp_witness,
    TcpAssessment, TcpWitness,
};
use crate::docmaps::{
    partial_action, positivity_falsifier, positivity_necessary, CovariantMap, FalsifierOutcome,
};
use crate::gallery;
use crate::ldoi::{spectrum, InvariantClass, MatrixTriple};
use crate::matcore::Tolerance;
use crate::{Error, Result};

/// Separability verdict with its supporting evidence.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "outcome")]
pub enum Verdict {
    #[serde(rename = "SEPARABLE")]
    Separable {
        certificate: String,
        witness: Option<TcpWitness>,
    },
    #[serde(rename = "ENTANGLED")]
    Entangled { certificate: EntanglementCertificate },
    #[serde(rename = "UNDECIDED")]
    Undecided { inconclusive: Vec<String> },
}

/// A reproducible certificate of entanglement.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EntanglementCertificate {
    /// A violated necessary separability condition, with its margin.
    FailedNecessary { test: String, margin: f64 },
    /// A positive covariant map whose partial action left the PSD cone.
    WitnessMap { id: String, min_eigenvalue: f64 },
}

/// A named positive map used as an entanglement witness.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub id: String,
    pub map: CovariantMap,
}

/// Pipeline configuration.
#[derive(Debug, Clone)]
pub struct DetectConfig {
    pub catalog: Vec<CatalogEntry>,
    pub tol: Tolerance,
    /// Sample budget for the positivity falsifier used in catalog
    /// validation.
    pub samples: usize,
    pub seed: u64,
    /// Worker threads for the witness catalog (1 = sequential).
    pub jobs: usize,
}

impl DetectConfig {
    pub fn for_dimension(d: usize) -> Self {
        DetectConfig {
            catalog: default_catalog(d),
            tol: Tolerance::default(),
            samples: 2000,
            seed: 1,
            jobs: 1,
        }
    }
}

/// The default witness catalog: transposition, the Choi-type grid (d = 3),
/// the cyclic-shift maps, and the distinguished-direction map.
pub fn default_catalog(d: usize) -> Vec<CatalogEntry> {
    let mut catalog = vec![CatalogEntry {
        id: "transposition".into(),
        map: CovariantMap::new(
            crate::docmaps::MapClass::Duc,
            MatrixTriple::from_ldui_pair(
                crate::matcore::ComplexMatrix::identity(d),
                crate::matcore::ComplexMatrix::ones(d, d),
            )
            .expect("static"),
        ),
    }];
    if d == 3 {
        for mu in [1.0, 2.0, 5.0] {
            if let Ok(map) = gallery::choi_cho(1.0, mu, 0.0) {
                catalog.push(CatalogEntry {
                    id: format!("choi_cho(1,{mu},0)"),
                    map,
                });
            }
        }
    }
    if d >= 3 {
        if let Ok(map) = gallery::lambda(d) {
            catalog.push(CatalogEntry {
                id: format!("lambda({d})"),
                map,
            });
        }
    }
    for k in 1..d {
        if let Ok(map) = gallery::tau(d, k) {
            catalog.push(CatalogEntry {
                id: format!("tau({d},{k})"),
                map,
            });
        }
    }
    catalog
}

/// Validation report for a witness catalog.
#[derive(Debug, Clone, Serialize)]
pub struct CatalogValidation {
    pub accepted: Vec<String>,
    pub rejected: Vec<RejectedEntry>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RejectedEntry {
    pub id: String,
    pub reason: String,
}

/// Screens every catalog entry: it must pass the necessary positivity
/// conditions and survive the randomized falsifier. An entry that fails
/// either would make ENTANGLED verdicts unsound and is rejected.
pub fn witness_catalog_validate(
    catalog: &[CatalogEntry],
    tol: &Tolerance,
    samples: usize,
    seed: u64,
) -> CatalogValidation {
    let mut accepted = vec![];
    let mut rejected = vec![];
    for entry in catalog {
        let report = positivity_necessary(entry.map.triple(), tol);
        if let Some(item) = report.first_failure() {
            rejected.push(RejectedEntry {
                id: entry.id.clone(),
                reason: format!(
                    "necessary positivity condition '{}' violated (margin {})",
                    item.name, item.margin
                ),
            });
            continue;
        }
        match positivity_falsifier(entry.map.triple(), samples, seed, tol) {
            FalsifierOutcome::Counterexample { value, .. } => {
                rejected.push(RejectedEntry {
                    id: entry.id.clone(),
                    reason: format!("falsifier found product vectors with pairing {value}"),
                });
            }
            FalsifierOutcome::NoneFound => accepted.push(entry.id.clone()),
        }
    }
    CatalogValidation { accepted, rejected }
}

/// Full pipeline: necessary tests, sufficient constructions, then the
/// positive-map catalog. The input must be a self-adjoint PSD triple.
pub fn separability_verdict(t: &MatrixTriple, config: &DetectConfig) -> Result<Verdict> {
    let tol = &config.tol;
    let flags = crate::ldoi::symmetry_flags(t, tol);
    if !flags.self_adjoint {
        return Err(Error::InvalidValue(
            "input triple is not self-adjoint; not a state candidate".into(),
        ));
    }
    if let Some(item) = psd_test(t, tol).first_failure() {
        return Err(Error::InvalidValue(format!(
            "input triple is not positive semi-definite ({} margin {}); not a state candidate",
            item.name, item.margin
        )));
    }

    // 1. PPT
    if let Some(item) = ppt_test(t, tol).first_failure() {
        return Ok(Verdict::Entangled {
            certificate: EntanglementCertificate::FailedNecessary {
                test: format!("ppt:{}", item.name),
                margin: item.margin,
            },
        });
    }

    // 2. realignment and the rest of the necessary battery
    if let Some(item) = realignment_test(t, tol).first_failure() {
        return Ok(Verdict::Entangled {
            certificate: EntanglementCertificate::FailedNecessary {
                test: format!("realignment:{}", item.name),
                margin: item.margin,
            },
        });
    }
    if let Some(item) = tcp_necessary_battery(t, tol).first_failure() {
        return Ok(Verdict::Entangled {
            certificate: EntanglementCertificate::FailedNecessary {
                test: format!("battery:{}", item.name),
                margin: item.margin,
            },
        });
    }

    // 3. sufficient constructions
    let mut inconclusive: Vec<String> = vec![];
    match tcp_certify(t, tol) {
        TcpAssessment::Certified { certificate, witness } => {
            if let Some(w) = &witness {
                debug_assert!(verify_tcp_witness(t, w, tol));
            }
            return Ok(Verdict::Separable { certificate, witness });
        }
        TcpAssessment::Refuted { test, margin } => {
            return Ok(Verdict::Entangled {
                certificate: EntanglementCertificate::FailedNecessary { test, margin },
            });
        }
        TcpAssessment::Inconclusive { tried } => inconclusive.extend(tried),
    }

    // 4. positive-map witness catalog
    let applicable: Vec<&CatalogEntry> = config
        .catalog
        .iter()
        .filter(|e| e.map.dim() == t.dim())
        .collect();
    let outcomes = run_catalog(&applicable, t, tol, config.jobs);
    for (entry, min_eig) in applicable.iter().zip(outcomes.iter()) {
        match min_eig {
            Ok(Some(lambda)) => {
                return Ok(Verdict::Entangled {
                    certificate: EntanglementCertificate::WitnessMap {
                        id: entry.id.clone(),
                        min_eigenvalue: *lambda,
                    },
                });
            }
            Ok(None) => {}
            Err(e) => {
                return Err(Error::Numerical(format!(
                    "catalog entry '{}' failed to evaluate: {e}",
                    entry.id
                )))
            }
        }
    }
    inconclusive.push("witness_catalog".into());

    Ok(Verdict::Undecided { inconclusive })
}

/// Evaluates the catalog, optionally across threads; results keep catalog
/// order so the first certificate in the fixed order wins deterministically.
fn run_catalog(
    entries: &[&CatalogEntry],
    t: &MatrixTriple,
    tol: &Tolerance,
    jobs: usize,
) -> Vec<Result<Option<f64>>> {
    let eval = |entry: &CatalogEntry| -> Result<Option<f64>> {
        let moved = partial_action(&entry.map, t)?;
        if psd_test(&moved, tol).passed() {
            return Ok(None);
        }
        let eigs = spectrum(&moved, InvariantClass::Ldoi)?;
        let min = eigs.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
        Ok(Some(min))
    };
    if jobs <= 1 || entries.len() <= 1 {
        return entries.iter().map(|e| eval(e)).collect();
    }
    let chunk = entries.len().div_ceil(jobs);
    let mut results: Vec<Result<Option<f64>>> = Vec::with_capacity(entries.len());
    std::thread::scope(|scope| {
        let mut handles = vec![];
        for batch in entries.chunks(chunk) {
            handles.push(scope.spawn(move || {
                batch.iter().map(|e| eval(e)).collect::<Vec<_>>()
            }));
        }
        for handle in handles {
            results.extend(handle.join().expect("catalog worker panicked"));
        }
    });
    results
}

/// Convenience: run the pipeline with the default configuration for the
/// triple's dimension.
pub fn separability_verdict_default(t: &MatrixTriple) -> Result<Verdict> {
    separability_verdict(t, &DetectConfig::for_dimension(t.dim()))
}
