use std::path::PathBuf;

use clap::Args;
use pairstream::bounds::{
    auc_rademacher_bound, contraction_bound, excess_risk_bound_rhs, metric_rademacher_bound, mkl_rademacher_bound,
    olp_regret_rate_rhs, rademacher_terms, AucVariant, BoundInputs, ExcessRiskKind, MetricVariant, MklVariant,
};
use serde::Serialize;

use crate::output::{emit, render, Format};
use crate::{config_err, CliResult};

#[derive(Debug, Clone, Args)]
pub struct BoundsArgs {
    /// TOML file of bound inputs (n, d, x_p, x_2, x_inf, w_norm, p, q, kappa, num_kernels,
    /// lipschitz, y_bound, loss_bound, delta, regret, s, c_d). Missing keys take defaults.
    #[arg(long)]
    pub inputs: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundRow {
    pub table: String,
    pub variant: String,
    pub formula: String,
    pub value: f64,
}

fn row(table: &str, variant: &str, formula: &str, value: f64) -> BoundRow {
    BoundRow {
        table: table.into(),
        variant: variant.into(),
        formula: formula.into(),
        value,
    }
}

pub fn bound_rows(inputs: &BoundInputs) -> CliResult<Vec<BoundRow>> {
    let mut rows = Vec::new();
    for v in AucVariant::ALL {
        rows.push(row("1", v.name(), v.formula(), auc_rademacher_bound(v, inputs).map_err(config_err)?));
    }
    for v in MetricVariant::ALL {
        rows.push(row("2", v.name(), v.formula(), metric_rademacher_bound(v, inputs).map_err(config_err)?));
    }
    for v in MklVariant::ALL {
        rows.push(row("3", v.name(), v.formula(), mkl_rademacher_bound(v, inputs).map_err(config_err)?));
    }

    // Per-step Rademacher terms for the excess-risk rows: the contracted Table 1
    // Lq-ball rate, L * Y * 2 |X|_p |W|_q sqrt(p-1) / sqrt(m).
    let unit = BoundInputs { n: 1, ..*inputs };
    let rate = contraction_bound(
        inputs.lipschitz,
        inputs.y_bound,
        auc_rademacher_bound(AucVariant::LqBall, &unit).map_err(config_err)?,
    )
    .map_err(config_err)?;
    if inputs.regret.is_some() {
        let terms = rademacher_terms(rate, inputs.n, None);
        rows.push(row(
            "thm3",
            "all-pairs",
            "4/(n-1) sum_t R_{t-1} + regret/(n-1) + 6B sqrt(ln(n/delta)/(n-1))",
            excess_risk_bound_rhs(ExcessRiskKind::AllPairs, inputs, &terms).map_err(config_err)?,
        ));
    }
    if let Some(s) = inputs.s {
        let terms = rademacher_terms(rate, inputs.n, Some(s));
        rows.push(row(
            "thm5",
            "finite-buffer",
            "4/(n-1) sum_t R_{min(t-1,s)} + regret/(n-1) + 6B sqrt(ln(n/delta)/s)",
            excess_risk_bound_rhs(ExcessRiskKind::FiniteBuffer, inputs, &terms).map_err(config_err)?,
        ));
        rows.push(row(
            "thm7",
            "olp-rate",
            "C_d sqrt(ln(n/delta)/s) + sqrt(1/(n-1))",
            olp_regret_rate_rhs(inputs).map_err(config_err)?,
        ));
    }
    Ok(rows)
}

pub fn cmd_bounds(args: BoundsArgs) -> CliResult<()> {
    let inputs = match &args.inputs {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
            toml::from_str(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))?
        }
        None => BoundInputs::default(),
    };
    emit(&render(&bound_rows(&inputs)?, args.format)?, args.out.as_deref())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_tables_have_eight_rows() {
        let rows = bound_rows(&BoundInputs::default()).unwrap();
        assert_eq!(rows.len(), 8);
        assert_eq!(rows[0].value, 0.2);
    }

    #[test]
    fn regret_and_buffer_rows_appear_when_supplied() {
        let inputs = BoundInputs {
            regret: Some(10.0),
            s: Some(16),
            ..Default::default()
        };
        let rows = bound_rows(&inputs).unwrap();
        let tables: Vec<&str> = rows.iter().map(|r| r.table.as_str()).collect();
        assert_eq!(&tables[8..], &["thm3", "thm5", "thm7"]);
    }

    #[test]
    fn invalid_inputs_are_config_errors() {
        let inputs = BoundInputs { d: 1, ..Default::default() };
        assert!(matches!(bound_rows(&inputs), Err(crate::CliError::Config(_))));
    }
}
