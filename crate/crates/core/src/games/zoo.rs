use serde::{Deserialize, Serialize};

use super::{
    bilinear_game, dirac_gan_game, quadratic_game, GameError, GameOracle, MlpGan, MlpGanConfig,
};
use crate::linalg::DenseMatrix;

/// Identifiers accepted by [`GameSpec`].
pub const GAME_IDS: [&str; 4] = ["bilinear", "quadratic", "dirac", "mlp"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BilinearParams {
    /// Row-major `m×n` coupling.
    pub b: Vec<Vec<f64>>,
}

impl Default for BilinearParams {
    fn default() -> Self {
        BilinearParams { b: vec![vec![1.0]] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadraticParams {
    pub a_xx: Vec<Vec<f64>>,
    pub a_yy: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
    /// Zeros when omitted.
    pub b_x: Option<Vec<f64>>,
    /// Zeros when omitted.
    pub b_y: Option<Vec<f64>>,
}

impl Default for QuadraticParams {
    fn default() -> Self {
        QuadraticParams {
            a_xx: vec![vec![-1.0]],
            a_yy: vec![vec![1.0]],
            b: vec![vec![-1.0]],
            b_x: None,
            b_y: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiracParams {}

/// A zoo game selected by id plus a parameter object, e.g.
/// `{"id": "quadratic", "params": {"a_xx": [[1]], "a_yy": [[-1]], "b": [[1]]}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", content = "params", rename_all = "snake_case")]
pub enum GameSpec {
    Bilinear(BilinearParams),
    Quadratic(QuadraticParams),
    Dirac(DiracParams),
    Mlp(MlpGanConfig),
}

impl GameSpec {
    /// Default parameters for a game id.
    pub fn default_for(id: &str) -> Result<Self, GameError> {
        match id {
            "bilinear" => Ok(GameSpec::Bilinear(BilinearParams::default())),
            "quadratic" => Ok(GameSpec::Quadratic(QuadraticParams::default())),
            "dirac" => Ok(GameSpec::Dirac(DiracParams::default())),
            "mlp" => Ok(GameSpec::Mlp(MlpGanConfig::default())),
            other => Err(GameError::UnknownGame(other.to_string())),
        }
    }

    pub fn id(&self) -> &'static str {
        match self {
            GameSpec::Bilinear(_) => "bilinear",
            GameSpec::Quadratic(_) => "quadratic",
            GameSpec::Dirac(_) => "dirac",
            GameSpec::Mlp(_) => "mlp",
        }
    }

    pub fn build(&self) -> Result<Box<dyn GameOracle>, GameError> {
        Ok(match self {
            GameSpec::Bilinear(p) => Box::new(bilinear_game(DenseMatrix::from_rows(&p.b)?)?),
            GameSpec::Quadratic(p) => {
                let a_xx = DenseMatrix::from_rows(&p.a_xx)?;
                let a_yy = DenseMatrix::from_rows(&p.a_yy)?;
                let b = DenseMatrix::from_rows(&p.b)?;
                let b_x = p.b_x.clone().unwrap_or_else(|| vec![0.0; a_xx.rows()]);
                let b_y = p.b_y.clone().unwrap_or_else(|| vec![0.0; a_yy.rows()]);
                Box::new(quadratic_game(a_xx, a_yy, b, b_x, b_y)?)
            }
            GameSpec::Dirac(_) => Box::new(dirac_gan_game()),
            GameSpec::Mlp(c) => Box::new(MlpGan::new(c.clone())?),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_id_has_defaults_that_build() {
        for id in GAME_IDS {
            let spec = GameSpec::default_for(id).unwrap();
            assert_eq!(spec.id(), id);
            let game = spec.build().unwrap();
            assert_eq!(game.name(), id);
        }
        assert!(matches!(
            GameSpec::default_for("chess"),
            Err(GameError::UnknownGame(_))
        ));
    }

    #[test]
    fn quadratic_defaults_fill_linear_terms() {
        let game = GameSpec::Quadratic(QuadraticParams {
            a_xx: vec![vec![1.0, 0.0], vec![0.0, 2.0]],
            a_yy: vec![vec![-1.0]],
            b: vec![vec![1.0], vec![0.5]],
            b_x: None,
            b_y: None,
        })
        .build()
        .unwrap();
        assert_eq!(game.dims(), (2, 1));
    }
}
