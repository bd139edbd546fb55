use anyhow::{anyhow, bail, Context, Result};
use bounded_series::num::parse_rational;
use bounded_series::{CRational, Rho, SeriesSpec, SignRule};
use clap::{Args, ValueEnum};

pub const SCHEMA_HINT: &str = "series spec schema: a JSON object tagged by \"rule\", e.g. \
{\"rule\":\"theta\",\"rho\":\"1/3\",\"signs\":\"all_plus\"}, {\"rule\":\"gaussian\",\"lambda\":\"1\",\"m\":0}, \
{\"rule\":\"explicit\",\"coeffs\":[\"1\",\"-1/2\"]}, {\"rule\":\"shifted\",\"inner\":{...},\"k\":2}; \
rules: explicit, gaussian, poly_gaussian, sin, cos, sin_scaled, exp_neg2m, exp_neg_half2m, \
exp_neg_sq_over_m, theta, complementary_bell_egf, shifted, sum, scaled, product, left_extended \
(see README, \"Series specs\")";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum FamilyArg {
    Theta,
    Gaussian,
    PolyGaussian,
    Sin,
    Cos,
    SinScaled,
    ExpNeg2m,
    ExpNegHalf2m,
    ExpNegSqOverM,
    BellEgf,
    Explicit,
}

/// A series, given either as a JSON spec or by family flags.
#[derive(Args, Clone, Debug, Default)]
pub struct SeriesArgs {
    /// Series spec as inline JSON or a path to a JSON file.
    #[arg(long, conflicts_with = "family")]
    pub spec: Option<String>,
    #[arg(long, value_enum)]
    pub family: Option<FamilyArg>,
    /// Theta decay: `1/3`, `0.5`, `sqrt(1/2)`.
    #[arg(long)]
    pub rho: Option<String>,
    /// Theta signs: all_plus, alternating, random[:SEED], explicit:+,-,...
    #[arg(long)]
    pub signs: Option<String>,
    /// Gaussian parameter λ in z^m exp(−λz²).
    #[arg(long)]
    pub lambda: Option<String>,
    #[arg(long)]
    pub m: Option<u32>,
    /// Exponent n in p(z)·exp(−z^{2n}).
    #[arg(long)]
    pub degree: Option<u32>,
    /// Comma-separated coefficients (explicit) or polynomial (poly_gaussian).
    #[arg(long, allow_hyphen_values = true)]
    pub coeffs: Option<String>,
}

fn parse_coeffs(s: &str) -> Result<Vec<CRational>> {
    s.split(',')
        .map(|t| t.trim().parse::<CRational>().map_err(|e| anyhow!("{e}")))
        .collect()
}

fn parse_signs(s: &str, seed: u64) -> Result<SignRule> {
    let s = s.trim();
    Ok(match s {
        "all_plus" => SignRule::AllPlus,
        "alternating" => SignRule::Alternating,
        "random" => SignRule::Random(seed),
        _ => {
            if let Some(v) = s.strip_prefix("random:") {
                SignRule::Random(v.parse().context("random seed")?)
            } else if let Some(v) = s.strip_prefix("explicit:") {
                let signs = v
                    .split(',')
                    .map(|t| match t.trim() {
                        "+" | "+1" | "1" => Ok(1),
                        "-" | "-1" => Ok(-1),
                        other => Err(anyhow!("bad sign {other:?}")),
                    })
                    .collect::<Result<Vec<i8>>>()?;
                SignRule::Explicit(signs)
            } else {
                bail!("unknown sign rule {s:?}; expected all_plus, alternating, random[:SEED] or explicit:+,-,...")
            }
        }
    })
}

impl SeriesArgs {
    /// `seed` fills in `--signs random` without an explicit seed.
    pub fn build(&self, seed: u64) -> Result<SeriesSpec> {
        if let Some(spec) = &self.spec {
            let text = if spec.trim_start().starts_with('{') {
                spec.clone()
            } else {
                std::fs::read_to_string(spec).with_context(|| format!("reading series spec {spec}"))?
            };
            return SeriesSpec::from_json(&text)
                .map_err(|e| anyhow!("malformed series spec: {e}\n{SCHEMA_HINT}"));
        }
        let family = self
            .family
            .ok_or_else(|| anyhow!("a series is required: pass --family or --spec\n{SCHEMA_HINT}"))?;
        let m = |default: u32| self.m.unwrap_or(default);
        let s = match family {
            FamilyArg::Theta => {
                let rho: Rho = self
                    .rho
                    .as_deref()
                    .ok_or_else(|| anyhow!("--family theta needs --rho"))?
                    .parse()?;
                let signs = parse_signs(self.signs.as_deref().unwrap_or("all_plus"), seed)?;
                SeriesSpec::theta(rho, signs)?
            }
            FamilyArg::Gaussian => {
                let lambda = parse_rational(self.lambda.as_deref().unwrap_or("1"))?;
                SeriesSpec::gaussian(lambda, m(0))?
            }
            FamilyArg::PolyGaussian => {
                let poly = parse_coeffs(
                    self.coeffs
                        .as_deref()
                        .ok_or_else(|| anyhow!("--family poly_gaussian needs --coeffs"))?,
                )?;
                SeriesSpec::poly_gaussian(poly, self.degree.unwrap_or(1))?
            }
            FamilyArg::Sin => SeriesSpec::sin(),
            FamilyArg::Cos => SeriesSpec::cos(),
            FamilyArg::SinScaled => SeriesSpec::sin_scaled(m(1))?,
            FamilyArg::ExpNeg2m => SeriesSpec::exp_neg_2m(m(1))?,
            FamilyArg::ExpNegHalf2m => SeriesSpec::exp_neg_half_2m(m(1))?,
            FamilyArg::ExpNegSqOverM => SeriesSpec::exp_neg_sq_over_m(m(1))?,
            FamilyArg::BellEgf => SeriesSpec::complementary_bell_egf(),
            FamilyArg::Explicit => SeriesSpec::explicit(parse_coeffs(
                self.coeffs
                    .as_deref()
                    .ok_or_else(|| anyhow!("--family explicit needs --coeffs"))?,
            )?),
        };
        Ok(s)
    }
}
