//! CSV renderings of the statistics outputs.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::groups::RoiSummary;
use super::layers::{LayerDistributions, LayerPreference};
use super::voxelwise::VoxelSignificance;

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn significance_csv(sig: &VoxelSignificance) -> String {
    let mut out = String::from("voxel_id,p,p_adjusted,reject,flags\n");
    for v in 0..sig.reject.len() {
        let flag = if sig.pvalues.undefined[v] { "undefined" } else { "" };
        writeln!(out, "{v},{},{},{},{flag}", sig.pvalues.p[v], sig.adjusted[v], sig.reject[v] as u8)
            .expect("write to string");
    }
    out
}

pub fn roi_csv(rows: &[RoiSummary]) -> String {
    let mut out = String::from("roi,n_voxels,mean,ci_low,ci_high,flags\n");
    for r in rows {
        let flag = if r.mean.is_none() { "empty" } else { "" };
        writeln!(
            out,
            "{},{},{},{},{},{flag}",
            r.roi,
            r.n_voxels,
            opt(r.mean),
            opt(r.ci.map(|c| c.0)),
            opt(r.ci.map(|c| c.1))
        )
        .expect("write to string");
    }
    out
}

pub fn preference_csv(pref: &LayerPreference) -> String {
    let mut out = String::from("voxel_id,preferred_layer,tied\n");
    for (v, p) in pref.preferred.iter().enumerate() {
        if let Some(l) = p {
            writeln!(out, "{v},{l},{}", pref.tied[v] as u8).expect("write to string");
        }
    }
    out
}

pub fn distributions_csv(d: &LayerDistributions) -> String {
    let mut out = String::from("layer,voxel_pref_pct,word_importance_pct\n");
    for (l, (a, b)) in d.voxel_pref_pct.iter().zip(&d.word_importance_pct).enumerate() {
        writeln!(out, "{l},{a},{b}").expect("write to string");
    }
    out
}

pub fn pos_csv(by_tag: &BTreeMap<String, Vec<f64>>) -> String {
    let n_layers = by_tag.values().map(Vec::len).max().unwrap_or(0);
    let mut out = String::from("tag");
    for l in 0..n_layers {
        write!(out, ",layer_{l}_pct").expect("write to string");
    }
    out.push('\n');
    for (tag, pct) in by_tag {
        out.push_str(tag);
        for p in pct {
            write!(out, ",{p}").expect("write to string");
        }
        out.push('\n');
    }
    out
}
