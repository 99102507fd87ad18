//! WebAssembly bindings for the browser explorer in `www/`.
//!
//! The `Explorer` methods return flat arrays or JSON strings; the work is
//! done by plain functions in this file so it can be tested natively.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use wasm_bindgen::prelude::*;

use toral_markov::partition_builder::{polygons, rect_polygons};
use toral_markov::shadowing::random_pseudo_orbit;
use toral_markov::symbolic::{transition_matrix, TransitionMatrix};
use toral_markov::{
    build_cover_at, build_partition, cylinder, encode, iterate, make_automorphism, shadow, verify_shadow, Coding,
    MarkovPartition, PseudoOrbit, ToralAutomorphism, TorusPoint,
};

type Poly = [[f64; 2]; 4];

pub struct Model {
    pub f: ToralAutomorphism,
    pub p: MarkovPartition,
    pub a: TransitionMatrix,
}

impl Model {
    /// Same construction as the command line build: the cover at beta/2.
    pub fn new(m: [[i64; 2]; 2], beta: f64) -> Result<Self, String> {
        let f = make_automorphism(m).map_err(|e| e.to_string())?;
        let cover = build_cover_at(&f, beta / 2.0).map_err(|e| e.to_string())?;
        let p = build_partition(&f, &cover);
        let a = transition_matrix(&f, &p);
        Ok(Model { f, p, a })
    }

    /// Stride 10: cell, owning cover rectangle, then four corners.
    pub fn polygon_buffer(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (k, c) in polygons(&self.f, &self.p) {
            out.push(k as f64);
            out.push(self.p.cells[k].cover.first().copied().unwrap_or(0) as f64);
            out.extend(c.iter().flatten());
        }
        out
    }

    pub fn code(&self, x: f64, y: f64, depth: usize) -> CodeResult {
        let pt = TorusPoint::new(x, y);
        match encode(&self.f, &self.p, &pt, depth) {
            Coding::Word(w) => match cylinder(&self.f, &self.p, &w) {
                Ok(k) => {
                    let c = k.rect.center(&self.f);
                    let centre = w.at(0);
                    CodeResult::Word {
                        word: w.word.iter().map(|s| s + 1).collect(),
                        cell: rect_polygons(&self.f, self.p.rect(centre)),
                        cylinder: rect_polygons(&self.f, &k.rect),
                        center: c.coords(),
                        diameter: k.diameter,
                    }
                }
                Err(e) => CodeResult::Error { message: e.to_string() },
            },
            Coding::BoundaryHit { index, candidates } => CodeResult::Boundary {
                step: index,
                candidates: candidates.iter().map(|s| s + 1).collect(),
            },
        }
    }

    pub fn shadow_noisy(&self, x: f64, y: f64, half_width: usize, delta: f64, seed: u64) -> Result<ShadowDemo, String> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let start = iterate(&self.f, &TorusPoint::new(x, y), -(half_width as i64));
        let q = PseudoOrbit::new(&self.f, random_pseudo_orbit(&self.f, start, half_width, delta, &mut rng))
            .map_err(|e| e.to_string())?;
        let s = shadow(&self.f, &q).map_err(|e| e.to_string())?;
        let orbit = (-(half_width as i64)..=half_width as i64).map(|n| iterate(&self.f, &s.point, n).coords()).collect();
        Ok(ShadowDemo {
            pseudo: q.points.iter().map(|p| p.coords()).collect(),
            orbit,
            delta: q.delta,
            beta: s.beta_certified,
            verified: verify_shadow(&self.f, &q, &s.point, s.beta_certified),
        })
    }
}

#[derive(Debug, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CodeResult {
    Word { word: Vec<usize>, cell: Vec<Poly>, cylinder: Vec<Poly>, center: [f64; 2], diameter: f64 },
    Boundary { step: i64, candidates: Vec<usize> },
    Error { message: String },
}

#[derive(Debug, Serialize)]
pub struct ShadowDemo {
    pub pseudo: Vec<[f64; 2]>,
    pub orbit: Vec<[f64; 2]>,
    pub delta: f64,
    pub beta: f64,
    pub verified: bool,
}

#[wasm_bindgen]
pub struct Explorer {
    model: Model,
}

#[wasm_bindgen]
impl Explorer {
    #[wasm_bindgen(constructor)]
    pub fn new(a: i32, b: i32, c: i32, d: i32, beta: f64) -> Result<Explorer, JsError> {
        let m = [[a as i64, b as i64], [c as i64, d as i64]];
        Model::new(m, beta).map(|model| Explorer { model }).map_err(|e| JsError::new(&e))
    }

    pub fn cells(&self) -> usize {
        self.model.p.len()
    }

    pub fn transitions(&self) -> usize {
        self.model.a.nnz()
    }

    pub fn lambda_u(&self) -> f64 {
        self.model.f.lambda_u
    }

    pub fn polygons(&self) -> Vec<f64> {
        self.model.polygon_buffer()
    }

    /// JSON with `kind` = "word", "boundary" or "error".
    pub fn code(&self, x: f64, y: f64, depth: usize) -> String {
        serde_json::to_string(&self.model.code(x, y, depth)).unwrap_or_default()
    }

    pub fn shadow(&self, x: f64, y: f64, half_width: usize, delta: f64, seed: u32) -> Result<String, JsError> {
        let demo = self.model.shadow_noisy(x, y, half_width, delta, seed as u64).map_err(|e| JsError::new(&e))?;
        serde_json::to_string(&demo).map_err(|e| JsError::new(&e.to_string()))
    }
}
