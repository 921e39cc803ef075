//! Wave and scattering map checks on the standard star-graph setup.

use std::sync::Arc;

use triple_scatter::hardy::measures::Setup;
use triple_scatter::hardy::{
    scattering_representative, smooth_vector, smooth_vector_from_g, wave_map, wave_representative,
    Field, Grid, HardyError, SymbolTrack, WaveDirection,
};
use triple_scatter::scatter::scattering_via_model_form;
use triple_scatter::CMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct WaveChecks {
    /// Scattering map against the composition of the two wave maps, relative.
    pub composition: f64,
    /// Scattering map at `κ = 0` against the identity, relative.
    pub zero_kappa: f64,
    /// Pointwise multiplier against the scattering module's model-form product.
    pub model_form: f64,
    /// `|‖W v‖ / ‖P_K v‖ - 1|`.
    pub norm_change: f64,
    pub masked: usize,
}

fn max_abs(f: &Field) -> f64 {
    f.data().iter().map(|x| x.norm()).fold(0.0, f64::max)
}

fn max_diff(a: &Field, b: &Field) -> f64 {
    a.data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn wave_checks(n: usize, l: f64) -> Result<WaveChecks, HardyError> {
    let setup = Setup::standard();
    let ext = &setup.ext;
    let e0 = ext.with_kappa(CMatrix::zeros(setup.dim(), setup.dim()))?;
    let grid = Arc::new(Grid::new(l, n)?);
    let track = Arc::new(SymbolTrack::from_model(grid.clone(), ext, &setup.model)?);
    let f = setup.base().sample(&grid);
    let mut masked = 0;

    let from_g = smooth_vector_from_g(track.clone(), &e0, &f)?;
    masked += from_g.masked_count();
    let v = from_g.value;
    let scale = max_abs(&v.g).max(max_abs(&v.g_tilde));
    let s = scattering_representative(&v, ext)?;
    let into = wave_representative(WaveDirection::MinusKappaZero, &v, ext)?;
    let via = wave_representative(WaveDirection::PlusZeroKappa, &into.value, ext)?;
    masked += s.masked_count() + into.masked_count() + via.masked_count();
    let composition = max_diff(&via.value.g, &s.value.g).max(max_diff(&via.value.g_tilde, &s.value.g_tilde)) / scale;

    let before = v.project_k().norm()?;
    let after = wave_map(WaveDirection::MinusKappaZero, &v, ext)?.value.norm()?;
    let norm_change = (after / before - 1.0).abs();

    let plain = smooth_vector(track, &e0, &f)?;
    masked += plain.masked_count();
    let v0 = plain.value;
    let scale0 = max_abs(&v0.g).max(max_abs(&v0.g_tilde));
    let id = scattering_representative(&v0, &e0)?.value;
    let zero_kappa = max_diff(&id.g, &v0.g).max(max_diff(&id.g_tilde, &v0.g_tilde)) / scale0;

    let moved = scattering_representative(&v0, ext)?.value;
    let mut model_form = 0.0_f64;
    for (j, &k) in grid.k().iter().enumerate() {
        if !(0.5..10.0).contains(&k) {
            continue;
        }
        let Ok(mf) = scattering_via_model_form(ext, &setup.model, k) else {
            continue;
        };
        let want = mf.product.apply(v0.g_tilde.at(j));
        for (a, b) in moved.g_tilde.at(j).iter().zip(&want) {
            model_form = model_form.max((a - b).norm());
        }
    }

    Ok(WaveChecks {
        composition,
        zero_kappa,
        model_form,
        norm_change,
        masked,
    })
}
