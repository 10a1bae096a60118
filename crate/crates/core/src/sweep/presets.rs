//! Figure presets. Threshold and density grids are this crate's own
//! choice (25 points per decade on log axes).

use super::{RunSpec, SweepError};

pub const PRESETS: &[(&str, &str)] = &[
    (
        "fig2a",
        r#"
kind = "validate"
name = "fig2a"
description = "D2D coverage, analytic vs simulation, U_c = 4, lambda_d = 1e-5"
tier = "d2d"
beta_db = { start = -10.0, stop = 20.0, step = 1.0 }
trials = 5000
seed = 42
[base]
u_c = 4
t_c = 20
lambda_d = 1e-5
"#,
    ),
    (
        "fig2b",
        r#"
kind = "validate"
name = "fig2b"
description = "CUE coverage, analytic vs simulation, U_c = 4, T_c in {4, 70}, lambda_d = 1e-5"
tier = "cellular"
beta_db = { start = -10.0, stop = 20.0, step = 1.0 }
trials = 5000
seed = 42
cases = [{ t_c = 4 }, { t_c = 70 }]
[base]
u_c = 4
lambda_d = 1e-5
"#,
    ),
    (
        "fig3a",
        r#"
name = "fig3a"
description = "ASR vs lambda_d for U_c in {1, 14}, T_c/U_c = 5"
[coupling]
ratio = 5
[[axes]]
param = "u_c"
values = [1, 14]
[[axes]]
param = "lambda_d"
spacing = "log"
start = 1e-6
stop = 1e-2
points_per_decade = 25
"#,
    ),
    (
        "fig3b",
        r#"
name = "fig3b"
description = "ASR vs U_c for lambda_d in {1e-6, 1e-4}, T_c/U_c = 5"
[coupling]
ratio = 5
[[axes]]
param = "lambda_d"
values = [1e-6, 1e-4]
[[axes]]
param = "u_c"
start = 1
stop = 20
points = 20
"#,
    ),
    (
        "fig5",
        r#"
name = "fig5"
description = "EE surface over (lambda_d, U_c), T_c/U_c = 5"
[coupling]
ratio = 5
[[axes]]
param = "u_c"
values = [1, 2, 4, 6, 8, 10, 12, 14, 16, 18, 20]
[[axes]]
param = "lambda_d"
spacing = "log"
start = 1e-6
stop = 1e-2
points_per_decade = 5
"#,
    ),
    (
        "fig6b",
        r#"
name = "fig6b"
description = "EE vs U_c for lambda_d in {1e-6, 1e-4}, T_c/U_c = 5"
[coupling]
ratio = 5
[[axes]]
param = "lambda_d"
values = [1e-6, 1e-4]
[[axes]]
param = "u_c"
start = 1
stop = 20
points = 20
"#,
    ),
    (
        "fig8a",
        r#"
name = "fig8a"
description = "ASR vs T_c at U_c = 4 for lambda_d in {1e-6, 1e-4}"
[base]
u_c = 4
[[axes]]
param = "lambda_d"
values = [1e-6, 1e-4]
[[axes]]
param = "t_c"
start = 4
stop = 100
points = 25
"#,
    ),
    (
        "fig8b",
        r#"
name = "fig8b"
description = "EE vs T_c at U_c = 4 for lambda_d in {1e-6, 1e-4}"
[base]
u_c = 4
[[axes]]
param = "lambda_d"
values = [1e-6, 1e-4]
[[axes]]
param = "t_c"
start = 4
stop = 100
points = 25
"#,
    ),
    (
        "fig9",
        r#"
name = "fig9"
description = "ASR and EE vs lambda_d for P_d in {6, 13} dBm and U_c in {1, 14}, T_c/U_c = 5"
[coupling]
ratio = 5
[[axes]]
param = "p_d"
values = [6, 13]
[[axes]]
param = "u_c"
values = [1, 14]
[[axes]]
param = "lambda_d"
spacing = "log"
start = 1e-6
stop = 1e-2
points_per_decade = 25
"#,
    ),
    (
        "fig10",
        r#"
name = "fig10"
description = "Cellular vs D2D rates over lambda_d for R_00 in {35, 50} m, U_c = 14, T_c = 70"
[base]
u_c = 14
[coupling]
ratio = 5
[[axes]]
param = "r_00"
values = [35, 50]
[[axes]]
param = "lambda_d"
spacing = "log"
start = 1e-6
stop = 1e-2
points_per_decade = 25
"#,
    ),
];

pub fn preset_names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}

pub fn preset(name: &str) -> Result<RunSpec, SweepError> {
    let (_, text) = PRESETS
        .iter()
        .find(|(n, _)| n.eq_ignore_ascii_case(name))
        .ok_or_else(|| {
            SweepError::Spec(format!(
                "unknown preset `{name}` (available: {})",
                preset_names().collect::<Vec<_>>().join(", ")
            ))
        })?;
    RunSpec::from_toml_str(text)
}
