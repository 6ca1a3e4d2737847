//! Bundled benchmark models.
//!
//! Each entry carries the surface source, the compiled graph, the
//! estimation target from the program's `return` expression, and a
//! default horizon chosen so that (except for the heavy-tailed `dmm`
//! and `zc` families) essentially all particle mass has terminated.
//!
//! Variant families are generated from one template: [`rw2_source`]
//! and [`zc_source`] produce the bundled `rw2a`/`rw2b` and `zc1`/`zc2`
//! sources for the rates baked into those files, and arbitrary rates
//! for sweeps.

use crate::{compile, parse, Compiled, DslError};
use ppg_estimator::TargetFunction;

/// A bundled model ready to run.
#[derive(Clone, Debug)]
pub struct ZooModel {
    /// Lookup name (`zc1`, `rw2b`, ...).
    pub name: &'static str,
    /// Family name; variants such as `zc1`/`zc2` share one.
    pub base: &'static str,
    /// One-line human description.
    pub title: &'static str,
    /// Surface source text.
    pub source: &'static str,
    /// Compiled graph plus lowered return expression.
    pub compiled: Compiled,
    /// Estimation target (the program's `return` expression).
    pub target: TargetFunction,
    /// Default step horizon.
    pub horizon: usize,
}

macro_rules! src {
    ($file:literal) => {
        include_str!(concat!("../models/", $file))
    };
}

/// Upper bound on the target used when the expression itself is not
/// predicate-shaped but its range is still known.
enum Bound {
    /// Infer from shape (predicates get 1, everything else unbounded).
    Auto,
    /// Known range bound, e.g. a posterior mean of a [0, 1] parameter.
    Known(f64),
}

fn entry(
    name: &'static str,
    base: &'static str,
    title: &'static str,
    source: &'static str,
    horizon: usize,
    bound: Bound,
) -> ZooModel {
    let ast = parse(source).unwrap_or_else(|e| panic!("bundled model {name} fails to parse: {e}"));
    let compiled =
        compile(&ast).unwrap_or_else(|e| panic!("bundled model {name} fails to compile: {e}"));
    let h = compiled
        .target
        .clone()
        .unwrap_or_else(|| panic!("bundled model {name} is missing a return expression"));
    let target = match bound {
        Bound::Auto => TargetFunction::new(h),
        Bound::Known(m) => TargetFunction::bounded(h, m)
            .unwrap_or_else(|e| panic!("bundled model {name} has a bad bound: {e}")),
    };
    ZooModel {
        name,
        base,
        title,
        source,
        compiled,
        target,
        horizon,
    }
}

/// The ten benchmark models (eight families; `zc` and `rw2` ship two
/// rate variants each), sorted by name.
pub fn model_zoo() -> Vec<ZooModel> {
    vec![
        entry(
            "at",
            "at",
            "aircraft tracked by six radar stations",
            src!("at.pp"),
            11,
            Bound::Auto,
        ),
        entry(
            "brp",
            "brp",
            "bounded retransmission over a lossy channel",
            src!("brp.pp"),
            284,
            Bound::Auto,
        ),
        entry(
            "dmm",
            "dmm",
            "dueling random walks with unknown step scales",
            src!("dmm.pp"),
            1003,
            Bound::Known(1.0),
        ),
        entry(
            "ht",
            "ht",
            "hare chasing a tortoise",
            src!("ht.pp"),
            104,
            Bound::Auto,
        ),
        entry(
            "niid",
            "niid",
            "repeated coin pairs, mean round count 24/7",
            src!("niid.pp"),
            103,
            Bound::Auto,
        ),
        entry(
            "rw1",
            "rw1",
            "random walk with unknown scale",
            src!("rw1.pp"),
            105,
            Bound::Known(1.0),
        ),
        entry(
            "rw2a",
            "rw2",
            "detector walk, detection rate 0.5",
            src!("rw2a.pp"),
            104,
            Bound::Auto,
        ),
        entry(
            "rw2b",
            "rw2",
            "detector walk, detection rate 0.9999",
            src!("rw2b.pp"),
            104,
            Bound::Auto,
        ),
        entry(
            "zc1",
            "zc",
            "address probing, unanswered-probe rate 0.5",
            src!("zc1.pp"),
            450,
            Bound::Known(1.0),
        ),
        entry(
            "zc2",
            "zc",
            "address probing, unanswered-probe rate 0.99",
            src!("zc2.pp"),
            1400,
            Bound::Known(1.0),
        ),
    ]
}

/// Look up a bundled model by name. Besides the zoo this also resolves
/// the small test fixtures `fig1`, `fig1_noobs` and `brp_mini`.
pub fn resolve_model(name: &str) -> Result<ZooModel, DslError> {
    match name {
        "fig1" => Ok(entry(
            "fig1",
            "fig1",
            "conditioned coin pair, posterior mean 1/3",
            src!("fig1.pp"),
            4,
            Bound::Known(1.0),
        )),
        "fig1_noobs" => Ok(entry(
            "fig1_noobs",
            "fig1",
            "unconditioned coin pair, mean 1/2",
            src!("fig1_noobs.pp"),
            4,
            Bound::Known(1.0),
        )),
        "brp_mini" => Ok(entry(
            "brp_mini",
            "brp_mini",
            "small discrete retransmission model",
            src!("brp_mini.pp"),
            10,
            Bound::Auto,
        )),
        "zc" => Err(DslError::UnknownModel(
            "model family `zc` has rate variants: pick `zc1` (0.5) or `zc2` (0.99)".into(),
        )),
        "rw2" => Err(DslError::UnknownModel(
            "model family `rw2` has rate variants: pick `rw2a` (0.5) or `rw2b` (0.9999)".into(),
        )),
        other => model_zoo()
            .into_iter()
            .find(|m| m.name == other)
            .ok_or_else(|| {
                let names: Vec<&str> = model_zoo().iter().map(|m| m.name).collect();
                DslError::UnknownModel(format!(
                    "unknown model `{other}`; bundled models: {} (fixtures: brp_mini, fig1, fig1_noobs)",
                    names.join(", ")
                ))
            }),
    }
}

/// Source of the detector-walk model at an arbitrary detection rate.
/// `rw2_source(0.5)` and `rw2_source(0.9999)` reproduce the bundled
/// `rw2a`/`rw2b` files byte for byte.
pub fn rw2_source(lambda: f64) -> String {
    format!(
        "# Random walk with unknown scale, watched by a flaky detector: at each\n\
         # of 100 steps the detector fires with probability {lambda} and, when it\n\
         # fires, confirms the step moved less than 2. Target: posterior mean of |y|.\n\
         var ~ U(0, 7);\n\
         y := 1;\n\
         i := 0;\n\
         while (i <= 100) {{\n    \
             oldy := y;\n    \
             y ~ N(oldy, 2 * var);\n    \
             flag ~ B({lambda});\n    \
             i := i + 1;\n    \
             observe(flag == 0 || |y - oldy| < 2);\n\
         }}\n\
         return |y|\n"
    )
}

/// Source of the address-probing model at an arbitrary unanswered-probe
/// rate. `zc_source(0.5)` and `zc_source(0.99)` reproduce the bundled
/// `zc1`/`zc2` files byte for byte.
pub fn zc_source(lambda: f64) -> String {
    format!(
        "# Address probing: a fresh address collides with unknown probability p;\n\
         # on collision the host probes, each probe going unanswered with\n\
         # probability {lambda}. An answered probe forces a restart, and every restart\n\
         # is conditioned on at least 20 probes having been sent first. Probing\n\
         # gives up after 100 unanswered probes. Target: posterior mean of p.\n\
         p ~ U(0, 1);\n\
         start := 1;\n\
         curprobe := 0;\n\
         established := 0;\n\
         while (curprobe < 100 && established <= 0 && start <= 1) {{\n    \
             if (start == 1) {{\n        \
                 flag ~ B(p);\n        \
                 if (flag == 0) {{ established := 1 }}\n        \
                 start := 0\n    \
             }} else {{\n        \
                 flag ~ B({lambda});\n        \
                 if (flag == 1) {{ curprobe := curprobe + 1 }}\n        \
                 else {{\n            \
                     observe(curprobe >= 20);\n            \
                     start := 1;\n            \
                     curprobe := 0\n        \
                 }}\n    \
             }}\n\
         }}\n\
         return p\n"
    )
}
