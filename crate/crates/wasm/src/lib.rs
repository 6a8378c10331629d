//! Browser bindings for the demo page in `www/`.
//!
//! Every entry point takes the graph as JSON text in the same format as the
//! command-line tool (`{"n": 3, "edges": [[0,1],[1,2],[0,2]], "q": [...]}`)
//! and returns JSON text, so the page needs no generated type glue.

use nodalmag::criticality::{morse_report_with, CriticalityConfig, CriticalityReport};
use nodalmag::duality::{band_scan, dual_scan};
use nodalmag::harness::parse_graph_str;
use nodalmag::operators::build_plain;
use nodalmag::spectral::eig;
use nodalmag::{CycleStructure, Graph};
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Serialize)]
struct MorseSummary {
    n: usize,
    betti: usize,
    surplus_edges: Vec<[usize; 2]>,
    levels: Vec<CriticalityReport>,
}

fn load(graph_json: &str) -> Result<(Graph, CycleStructure), String> {
    let g = parse_graph_str(graph_json, "graph").map_err(|e| e.to_string())?.graph;
    let cs = CycleStructure::new(&g, None);
    Ok((g, cs))
}

fn surplus_edge(cs: &CycleStructure, index: usize) -> Result<(usize, usize), String> {
    cs.surplus_edges().get(index).copied().ok_or_else(|| {
        format!("surplus edge {index} out of range (graph has {})", cs.surplus_edges().len())
    })
}

/// Spectrum, nodal surplus and Morse index of every level.
pub fn morse_summary(graph_json: &str) -> Result<String, String> {
    let (g, cs) = load(graph_json)?;
    let sd = eig(&build_plain(&g)).map_err(|e| e.to_string())?;
    let config = CriticalityConfig::default();
    let levels = (1..=g.n_vertices())
        .map(|l| morse_report_with(&g, &cs, &sd, l, &config))
        .collect::<nodalmag::Result<Vec<_>>>()
        .map_err(|e| e.to_string())?;
    let summary = MorseSummary {
        n: g.n_vertices(),
        betti: cs.betti(),
        surplus_edges: cs.surplus_edges().iter().map(|&(u, v)| [u, v]).collect(),
        levels,
    };
    serde_json::to_string(&summary).map_err(|e| e.to_string())
}

/// Eigenvalues of the magnetic operator over the phase torus (all levels).
pub fn band_scan_table(graph_json: &str, samples: usize) -> Result<String, String> {
    let (g, cs) = load(graph_json)?;
    Ok(band_scan(&g, &cs, None, samples).map_err(|e| e.to_string())?.to_json())
}

/// Magnetic and cut spectra along one surplus edge, with the reference curves.
pub fn dual_scan_table(graph_json: &str, edge: usize, samples: usize) -> Result<String, String> {
    let (g, cs) = load(graph_json)?;
    let edge = surplus_edge(&cs, edge)?;
    Ok(dual_scan(&g, &cs, edge, samples).map_err(|e| e.to_string())?.to_json())
}

#[wasm_bindgen]
pub fn morse(graph_json: &str) -> Result<String, JsValue> {
    morse_summary(graph_json).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = bandScan)]
pub fn band_scan_js(graph_json: &str, samples: usize) -> Result<String, JsValue> {
    band_scan_table(graph_json, samples).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = dualScan)]
pub fn dual_scan_js(graph_json: &str, edge: usize, samples: usize) -> Result<String, JsValue> {
    dual_scan_table(graph_json, edge, samples).map_err(|e| JsValue::from_str(&e))
}
