//! Browser bindings: grow one random path of a zw-measure level by level.

use gtzw_core::combinatorics::{diagonal_length, Signature};
use gtzw_core::rng::level_rng;
use gtzw_core::zw::{log_unnormalized_density, SamplerConfig, ZwChain, ZwParams};
use num_complex::Complex64;
use wasm_bindgen::prelude::*;

fn js_err(e: gtzw_core::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
pub struct Grower {
    chain: ZwChain,
    seed: u64,
    current: Signature,
}

#[wasm_bindgen]
impl Grower {
    /// Starts a path at level one. The same seed always grows the same path.
    #[wasm_bindgen(constructor)]
    pub fn new(z_re: f64, z_im: f64, w_re: f64, w_im: f64, seed: u64) -> Result<Grower, JsError> {
        let params = ZwParams::new(Complex64::new(z_re, z_im), Complex64::new(w_re, w_im)).map_err(js_err)?;
        // exact enumeration gets slow on wide levels; the demo only needs draws
        let cfg = SamplerConfig { seed, ..SamplerConfig::gibbs() };
        let chain = ZwChain::new(params, cfg).map_err(js_err)?;
        let current = chain.sample_first(&mut level_rng(seed, 0, 1));
        Ok(Grower { chain, seed, current })
    }

    pub fn step(&mut self) -> Result<(), JsError> {
        let level = self.current.level() + 1;
        self.current = self.chain.step(&self.current, &mut level_rng(self.seed, 0, level)).map_err(js_err)?;
        Ok(())
    }

    pub fn level(&self) -> usize {
        self.current.level()
    }

    /// Rows of the current signature, largest first.
    pub fn rows(&self) -> Vec<i32> {
        self.current.rows().iter().map(|&x| x as i32).collect()
    }

    /// Row lengths of the positive diagram.
    pub fn positive(&self) -> Vec<u32> {
        self.current.positive_part().rows().iter().map(|&x| x as u32).collect()
    }

    /// Row lengths of the negative diagram.
    pub fn negative(&self) -> Vec<u32> {
        self.current.negative_part().rows().iter().map(|&x| x as u32).collect()
    }

    /// Number of content-`k` cells in the positive diagram.
    pub fn diagonal(&self, k: i32) -> u32 {
        diagonal_length(&self.current.positive_part(), k as i64) as u32
    }

    /// Unnormalized log density of the current signature.
    pub fn log_weight(&self) -> f64 {
        log_unnormalized_density(&self.current, self.chain.params()).unwrap_or(f64::NAN)
    }
}
