use serde::{Deserialize, Serialize};

use convexpos::geom::canonicalize;
use convexpos::{AsymptoticModel, DomReport, Polygon};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolygonSummary {
    pub vertices: Vec<[f64; 2]>,
    pub canonical_vertices: Vec<[f64; 2]>,
    pub sides: Vec<f64>,
    pub angles: Vec<f64>,
    pub area: f64,
    pub hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionSummary {
    pub f: Vec<f64>,
    pub w: Vec<f64>,
    pub g: Vec<f64>,
    pub ap_star: f64,
    pub residual_inf: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomSummary {
    /// Winning side subset, 0-based.
    pub i_star: Vec<usize>,
    pub m: usize,
    pub tangency_set: Vec<usize>,
    pub ap_star: f64,
    pub k_t_vertices: Vec<[f64; 2]>,
    pub tangency_points: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub m_rates: Vec<f64>,
    pub sigma_inv: Vec<Vec<f64>>,
    pub d_k: f64,
    pub d_k_printed: f64,
    pub c_k: f64,
    pub log_c_k: f64,
    pub barany_limit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticRow {
    pub n: u64,
    pub log_p_asymptotic: f64,
    pub proxy: f64,
}

/// Everything `analyze` computes for one polygon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub polygon: PolygonSummary,
    /// Parametrizing-system solution on `K_T`.
    pub solution: SolutionSummary,
    pub dom: DomSummary,
    pub model: ModelSummary,
    pub table: Vec<AsymptoticRow>,
}

fn pts(p: &[convexpos::Point]) -> Vec<[f64; 2]> {
    p.iter().map(|&q| q.into()).collect()
}

pub fn asymptotic_rows(model: &AsymptoticModel, ns: &[u64]) -> Vec<AsymptoticRow> {
    ns.iter()
        .map(|&n| {
            let log_p = model.log_prob(n);
            AsymptoticRow {
                n,
                log_p_asymptotic: log_p,
                proxy: convexpos::asymptotics::barany_proxy(log_p, n),
            }
        })
        .collect()
}

impl AnalysisReport {
    pub fn build(poly: &Polygon, dom: &DomReport, model: &AsymptoticModel, ns: &[u64]) -> Self {
        let sol = &dom.solution;
        AnalysisReport {
            polygon: PolygonSummary {
                vertices: pts(poly.vertices()),
                canonical_vertices: pts(canonicalize(poly).vertices()),
                sides: poly.sides().to_vec(),
                angles: poly.angles().to_vec(),
                area: poly.area(),
                hash: poly.hash_hex(),
            },
            solution: SolutionSummary {
                f: sol.f.clone(),
                w: sol.w.clone(),
                g: sol.g.clone(),
                ap_star: sol.ap_star,
                residual_inf: sol.residual_inf,
            },
            dom: DomSummary {
                i_star: dom.i_star.indices().to_vec(),
                m: dom.m,
                tangency_set: dom.tangency_set.clone(),
                ap_star: dom.ap_star,
                k_t_vertices: pts(dom.k_t.vertices()),
                tangency_points: pts(dom.tangency_points()),
            },
            model: ModelSummary {
                m_rates: model.m_rates.clone(),
                sigma_inv: model.sigma_inv.clone(),
                d_k: model.d_k,
                d_k_printed: model.d_k_printed,
                c_k: model.c_k,
                log_c_k: model.log_c_k,
                barany_limit: model.barany_limit(),
            },
            table: asymptotic_rows(model, ns),
        }
    }
}
