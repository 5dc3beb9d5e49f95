//! Run configuration: a flat sectioned `key = value` file plus CSV sidecars
//! resolved relative to the config file.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use oqs_core::gksl::GKSLGenerator;
use oqs_core::liouville::{eigh, ops, projector, Operator};
use oqs_core::nonmarkov::MemoryKernel;
use oqs_core::weak_coupling::{presets, BathModel, CouplingPattern, SpectralDensity, SystemModel};
use oqs_core::DensityMatrix;

use crate::io::{read_matrix_csv, read_table_csv};

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub file: PathBuf,
    pub line: Option<usize>,
    pub key: Option<String>,
    pub msg: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.file.display())?;
        if let Some(line) = self.line {
            write!(f, ":{line}")?;
        }
        if let Some(key) = &self.key {
            write!(f, ": key `{key}`")?;
        }
        write!(f, ": {}", self.msg)
    }
}

#[derive(Debug, Clone)]
struct Entry {
    key: String,
    value: String,
    line: usize,
}

#[derive(Debug, Clone)]
struct Section {
    name: String,
    line: usize,
    entries: Vec<Entry>,
}

/// Parsed but untyped config file.
#[derive(Debug, Clone)]
pub struct Ini {
    path: PathBuf,
    sections: Vec<Section>,
}

impl Ini {
    pub fn parse(path: &Path, text: &str) -> Result<Self, ConfigError> {
        let mut sections: Vec<Section> = Vec::new();
        let err = |line: usize, msg: String| ConfigError {
            file: path.to_path_buf(),
            line: Some(line),
            key: None,
            msg,
        };
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let s = strip_comment(raw).trim();
            if s.is_empty() {
                continue;
            }
            if let Some(rest) = s.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| err(line, "unterminated section header".into()))?
                    .trim()
                    .to_ascii_lowercase();
                if name.is_empty() {
                    return Err(err(line, "empty section name".into()));
                }
                if sections.iter().any(|sec| sec.name == name) {
                    return Err(err(line, format!("section [{name}] appears twice")));
                }
                sections.push(Section {
                    name,
                    line,
                    entries: Vec::new(),
                });
                continue;
            }
            let (k, v) = s
                .split_once('=')
                .ok_or_else(|| err(line, format!("expected `key = value`, found `{s}`")))?;
            let key = k.trim().to_ascii_lowercase();
            if key.is_empty() {
                return Err(err(line, "empty key".into()));
            }
            let sec = sections
                .last_mut()
                .ok_or_else(|| err(line, "key outside of any [section]".into()))?;
            if sec.entries.iter().any(|e| e.key == key) {
                return Err(err(line, format!("key `{key}` repeated in [{}]", sec.name)));
            }
            sec.entries.push(Entry {
                key,
                value: v.trim().to_string(),
                line,
            });
        }
        Ok(Self {
            path: path.to_path_buf(),
            sections,
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|e| ConfigError {
            file: path.to_path_buf(),
            line: None,
            key: None,
            msg: format!("cannot read: {e}"),
        })?;
        Self::parse(path, &text)
    }

    fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }

    fn base_dir(&self) -> PathBuf {
        self.path.parent().map(Path::to_path_buf).unwrap_or_default()
    }
}

fn strip_comment(line: &str) -> &str {
    let t = line.trim_start();
    if t.starts_with('#') || t.starts_with(';') {
        return "";
    }
    match line.find(" #") {
        Some(i) => &line[..i],
        None => line,
    }
}

/// Typed view of one section that remembers where each value came from.
struct View<'a> {
    ini: &'a Ini,
    section: Option<&'a Section>,
    name: &'static str,
}

impl<'a> View<'a> {
    fn new(ini: &'a Ini, name: &'static str, allowed: &[&str]) -> Result<Self, ConfigError> {
        let section = ini.section(name);
        if let Some(sec) = section {
            for e in &sec.entries {
                if !allowed.contains(&e.key.as_str()) {
                    return Err(ConfigError {
                        file: ini.path.clone(),
                        line: Some(e.line),
                        key: Some(format!("{name}.{}", e.key)),
                        msg: format!("unknown key; expected one of: {}", allowed.join(", ")),
                    });
                }
            }
        }
        Ok(Self { ini, section, name })
    }

    /// View whose keys are free-form names.
    fn open(ini: &'a Ini, name: &'static str) -> Self {
        Self {
            ini,
            section: ini.section(name),
            name,
        }
    }

    fn present(&self) -> bool {
        self.section.is_some()
    }

    fn entry(&self, key: &str) -> Option<&'a Entry> {
        self.section.and_then(|s| s.entries.iter().find(|e| e.key == key))
    }

    fn err(&self, key: &str, msg: impl Into<String>) -> ConfigError {
        ConfigError {
            file: self.ini.path.clone(),
            line: self.entry(key).map(|e| e.line).or(self.section.map(|s| s.line)),
            key: Some(format!("{}.{key}", self.name)),
            msg: msg.into(),
        }
    }

    fn str(&self, key: &str) -> Option<&'a str> {
        self.entry(key).map(|e| e.value.as_str())
    }

    fn required_str(&self, key: &str) -> Result<&'a str, ConfigError> {
        self.str(key)
            .ok_or_else(|| self.err(key, format!("missing in [{}]", self.name)))
    }

    fn f64(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        self.str(key)
            .map(|v| parse_f64(v).ok_or_else(|| self.err(key, format!("expected a number, found `{v}`"))))
            .transpose()
    }

    fn required_f64(&self, key: &str) -> Result<f64, ConfigError> {
        self.f64(key)?
            .ok_or_else(|| self.err(key, format!("missing in [{}]", self.name)))
    }

    fn usize(&self, key: &str) -> Result<Option<usize>, ConfigError> {
        self.str(key)
            .map(|v| {
                v.parse::<usize>()
                    .map_err(|_| self.err(key, format!("expected a nonnegative integer, found `{v}`")))
            })
            .transpose()
    }

    fn list(&self, key: &str) -> Vec<&'a str> {
        self.str(key)
            .map(|v| v.split(',').map(str::trim).filter(|s| !s.is_empty()).collect())
            .unwrap_or_default()
    }

    fn f64_list(&self, key: &str) -> Result<Vec<f64>, ConfigError> {
        self.list(key)
            .into_iter()
            .map(|v| parse_f64(v).ok_or_else(|| self.err(key, format!("expected a number, found `{v}`"))))
            .collect()
    }

    fn path(&self, value: &str) -> PathBuf {
        let p = Path::new(value);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.ini.base_dir().join(p)
        }
    }

    fn matrix(&self, key: &str, value: &str) -> Result<Operator, ConfigError> {
        read_matrix_csv(&self.path(value)).map_err(|m| self.err(key, m))
    }

    fn entries(&self) -> &'a [Entry] {
        self.section.map(|s| s.entries.as_slice()).unwrap_or(&[])
    }
}

fn parse_f64(v: &str) -> Option<f64> {
    v.parse::<f64>().ok().filter(|x| x.is_finite())
}

#[derive(Debug, Clone)]
pub struct Model {
    pub name: String,
    pub h: Operator,
    /// Present for presets and for custom models with couplings.
    pub system: Option<SystemModel>,
    pub pattern: CouplingPattern,
    /// Explicit GKSL generator from `jumps`/`rates`.
    pub generator: Option<GKSLGenerator>,
}

impl Model {
    pub fn dim(&self) -> usize {
        self.h.nrows()
    }
}

#[derive(Debug, Clone)]
pub struct BathSpec {
    pub bath: BathModel,
    pub coupling: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Markov,
    MemoryKernel,
    PostMarkovian,
    Tcl2,
    CoarseGrain,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Self::Markov => "markov",
            Self::MemoryKernel => "memory_kernel",
            Self::PostMarkovian => "post_markovian",
            Self::Tcl2 => "tcl2",
            Self::CoarseGrain => "coarse_grain",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Solver {
    pub scheme: Scheme,
    pub output_times: Vec<f64>,
    pub kernel: Option<MemoryKernel>,
    pub max_step: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckKind {
    Cp,
    Markov,
    Kossakowski,
    Spohn,
    Relaxing,
}

impl CheckKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Cp => "cp",
            Self::Markov => "markov",
            Self::Kossakowski => "kossakowski",
            Self::Spohn => "spohn",
            Self::Relaxing => "relaxing",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Checks {
    pub run: Vec<CheckKind>,
    /// Process-matrix CSV used instead of semigroup samples.
    pub family: Option<PathBuf>,
    pub partitions: usize,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub path: PathBuf,
    pub model: Model,
    pub bath: Option<BathSpec>,
    pub initial: DensityMatrix,
    pub solver: Solver,
    pub observables: Vec<(String, Operator)>,
    pub checks: Checks,
}

const SECTIONS: [&str; 6] = ["model", "bath", "state", "solver", "observables", "checks"];

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        Self::from_ini(&Ini::load(path)?)
    }

    pub fn from_ini(ini: &Ini) -> Result<Self, ConfigError> {
        for s in &ini.sections {
            if !SECTIONS.contains(&s.name.as_str()) {
                return Err(ConfigError {
                    file: ini.path.clone(),
                    line: Some(s.line),
                    key: None,
                    msg: format!("unknown section [{}]; expected one of: {}", s.name, SECTIONS.join(", ")),
                });
            }
        }
        let model = parse_model(ini)?;
        let bath = parse_bath(ini, model.pattern)?;
        let initial = parse_state(ini, &model)?;
        let solver = parse_solver(ini)?;
        let observables = parse_observables(ini, &model)?;
        let checks = parse_checks(ini)?;
        Ok(Self {
            path: ini.path.clone(),
            model,
            bath,
            initial,
            solver,
            observables,
            checks,
        })
    }
}

fn parse_model(ini: &Ini) -> Result<Model, ConfigError> {
    let v = View::new(
        ini,
        "model",
        &[
            "preset",
            "omega0",
            "levels",
            "hamiltonian",
            "couplings",
            "pattern",
            "jumps",
            "rates",
        ],
    )?;
    if !v.present() {
        return Err(ConfigError {
            file: ini.path.clone(),
            line: None,
            key: None,
            msg: "missing [model] section".into(),
        });
    }
    let preset = v.required_str("preset")?.to_ascii_lowercase();
    let omega0 = v.f64("omega0")?.unwrap_or(1.0);
    if !(omega0 > 0.0) {
        return Err(v.err("omega0", "must be positive"));
    }
    let (base, arg) = match preset.split_once('(') {
        Some((b, rest)) => {
            let inner = rest
                .strip_suffix(')')
                .ok_or_else(|| v.err("preset", "unbalanced parenthesis"))?;
            let n = inner
                .trim()
                .parse::<usize>()
                .map_err(|_| v.err("preset", format!("expected a level count, found `{inner}`")))?;
            (b.trim(), Some(n))
        }
        None => (preset.as_str(), None),
    };
    let from_preset = |p: presets::Preset, name: String| Model {
        name,
        h: p.system.h.clone(),
        system: Some(p.system),
        pattern: p.pattern,
        generator: None,
    };
    let mut model = match base {
        "damped_qubit" => from_preset(presets::damped_qubit(omega0), base.into()),
        "pure_dephasing" => from_preset(presets::pure_dephasing(omega0), base.into()),
        "damped_oscillator" => {
            let levels = match (arg, v.usize("levels")?) {
                (Some(a), Some(b)) if a != b => return Err(v.err("levels", "disagrees with the preset argument")),
                (Some(a), _) => a,
                (None, Some(b)) => b,
                (None, None) => 10,
            };
            if levels < 2 {
                return Err(v.err("levels", "need at least 2 levels"));
            }
            from_preset(
                presets::damped_oscillator(omega0, levels),
                format!("damped_oscillator({levels})"),
            )
        }
        "custom" => {
            let h = v.matrix("hamiltonian", v.required_str("hamiltonian")?)?;
            let couplings = v
                .list("couplings")
                .into_iter()
                .map(|f| v.matrix("couplings", f))
                .collect::<Result<Vec<_>, _>>()?;
            let pattern = match v.str("pattern") {
                Some("single") => CouplingPattern::Single,
                Some("xy") => CouplingPattern::PositionXy,
                Some(other) => return Err(v.err("pattern", format!("expected single or xy, found `{other}`"))),
                None if couplings.len() == 2 => CouplingPattern::PositionXy,
                None => CouplingPattern::Single,
            };
            let system = if couplings.is_empty() {
                None
            } else {
                if couplings.len() != pattern.size() {
                    return Err(v.err(
                        "couplings",
                        format!(
                            "pattern needs {} coupling operators, found {}",
                            pattern.size(),
                            couplings.len()
                        ),
                    ));
                }
                Some(SystemModel::new(h.clone(), couplings).map_err(|e| v.err("couplings", e.to_string()))?)
            };
            Model {
                name: "custom".into(),
                h,
                system,
                pattern,
                generator: None,
            }
        }
        other => {
            return Err(v.err(
                "preset",
                format!(
                    "unknown preset `{other}`; expected damped_qubit, damped_oscillator(n), pure_dephasing or custom"
                ),
            ))
        }
    };

    let jumps = v.list("jumps");
    let rates = v.f64_list("rates")?;
    if !jumps.is_empty() || !rates.is_empty() {
        if jumps.len() != rates.len() {
            return Err(v.err(
                "rates",
                format!("{} rates for {} jump operators", rates.len(), jumps.len()),
            ));
        }
        let ops = jumps
            .iter()
            .map(|f| v.matrix("jumps", f))
            .collect::<Result<Vec<_>, _>>()?;
        let gen = GKSLGenerator::new(model.h.clone(), rates.into_iter().zip(ops).collect())
            .map_err(|e| v.err("jumps", e.to_string()))?;
        model.generator = Some(gen);
    }
    Ok(model)
}

fn parse_bath(ini: &Ini, pattern: CouplingPattern) -> Result<Option<BathSpec>, ConfigError> {
    let v = View::new(
        ini,
        "bath",
        &[
            "type",
            "alpha",
            "s",
            "omega_c",
            "omega_max",
            "t",
            "j0",
            "table",
            "coupling",
        ],
    )?;
    if !v.present() {
        return Ok(None);
    }
    let temperature = v.required_f64("t")?;
    let (density, default_max) = match v.required_str("type")? {
        "ohmic" => (
            SpectralDensity::Ohmic {
                alpha: v.required_f64("alpha")?,
                s: v.f64("s")?.unwrap_or(1.0),
                omega_c: v.required_f64("omega_c")?,
            },
            None,
        ),
        "flat" => (
            SpectralDensity::Flat {
                j0: v.required_f64("j0")?,
            },
            None,
        ),
        "table" => {
            let file = v.required_str("table")?;
            let cols = read_table_csv(&v.path(file), 2).map_err(|m| v.err("table", m))?;
            let last = cols[0].last().copied();
            let d =
                SpectralDensity::table(cols[0].clone(), cols[1].clone()).map_err(|e| v.err("table", e.to_string()))?;
            (d, last)
        }
        other => return Err(v.err("type", format!("expected ohmic, flat or table, found `{other}`"))),
    };
    let omega_max = match (v.f64("omega_max")?, default_max) {
        (Some(w), _) => w,
        (None, Some(w)) => w,
        (None, None) => return Err(v.err("omega_max", "missing in [bath]")),
    };
    let bath = BathModel::new(density, temperature, omega_max, pattern).map_err(|e| v.err("type", e.to_string()))?;
    let coupling = v.f64("coupling")?.unwrap_or(1.0);
    Ok(Some(BathSpec { bath, coupling }))
}

fn parse_state(ini: &Ini, model: &Model) -> Result<DensityMatrix, ConfigError> {
    let v = View::new(ini, "state", &["initial"])?;
    let n = model.dim();
    let spec = v.str("initial").unwrap_or("ground");
    let (_, vecs) = eigh(&model.h);
    let eigenstate = |k: usize| DensityMatrix::pure(&vecs.column(k).into_owned());
    Ok(match spec {
        "ground" => eigenstate(0),
        "excited" => eigenstate(n - 1),
        "mixed" => DensityMatrix::maximally_mixed(n),
        s if s.starts_with("basis:") => {
            let k: usize = s[6..]
                .trim()
                .parse()
                .map_err(|_| v.err("initial", format!("bad basis index in `{s}`")))?;
            if k >= n {
                return Err(v.err("initial", format!("basis index {k} out of range for dimension {n}")));
            }
            DensityMatrix::basis(n, k)
        }
        file => {
            let m = v.matrix("initial", file)?;
            if m.nrows() != n {
                return Err(v.err("initial", format!("state has dimension {}, model has {n}", m.nrows())));
            }
            DensityMatrix::new(m).map_err(|e| v.err("initial", e.to_string()))?
        }
    })
}

fn parse_solver(ini: &Ini) -> Result<Solver, ConfigError> {
    let v = View::new(
        ini,
        "solver",
        &["scheme", "t_final", "steps", "output_times", "g", "kernel", "max_step"],
    )?;
    let scheme = match v.str("scheme").unwrap_or("markov") {
        "markov" => Scheme::Markov,
        "memory_kernel" => Scheme::MemoryKernel,
        "post_markovian" => Scheme::PostMarkovian,
        "tcl2" => Scheme::Tcl2,
        "coarse_grain" => Scheme::CoarseGrain,
        other => {
            return Err(v.err(
                "scheme",
                format!("expected markov, memory_kernel, post_markovian, tcl2 or coarse_grain, found `{other}`"),
            ))
        }
    };
    let output_times = if v.str("output_times").is_some() {
        if v.str("t_final").is_some() || v.str("steps").is_some() {
            return Err(v.err("output_times", "give either output_times or t_final/steps"));
        }
        let t = v.f64_list("output_times")?;
        if t.is_empty() {
            return Err(v.err("output_times", "empty list"));
        }
        if t[0] < 0.0 {
            return Err(v.err("output_times", "times must be nonnegative"));
        }
        if t.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(v.err("output_times", "times must be strictly ascending"));
        }
        t
    } else {
        let t_final = v.f64("t_final")?.unwrap_or(0.0);
        if t_final < 0.0 {
            return Err(v.err("t_final", "must be nonnegative"));
        }
        let steps = v.usize("steps")?.unwrap_or(100);
        if t_final == 0.0 {
            vec![0.0]
        } else {
            if steps == 0 {
                return Err(v.err("steps", "must be positive"));
            }
            (0..=steps).map(|i| t_final * i as f64 / steps as f64).collect()
        }
    };
    let kernel = match (v.f64("g")?, v.str("kernel")) {
        (Some(_), Some(_)) => return Err(v.err("kernel", "give either g or a kernel table")),
        (Some(g), None) => Some(MemoryKernel::exponential(g).map_err(|e| v.err("g", e.to_string()))?),
        (None, Some(file)) => {
            let cols = read_table_csv(&v.path(file), 2).map_err(|m| v.err("kernel", m))?;
            Some(
                MemoryKernel::tabulated(cols[0].clone(), cols[1].clone())
                    .map_err(|e| v.err("kernel", e.to_string()))?,
            )
        }
        (None, None) => None,
    };
    if matches!(scheme, Scheme::MemoryKernel | Scheme::PostMarkovian) && kernel.is_none() {
        return Err(v.err("g", format!("scheme {} needs a kernel (g or kernel)", scheme.name())));
    }
    let max_step = v.f64("max_step")?;
    if max_step.is_some_and(|h| !(h > 0.0)) {
        return Err(v.err("max_step", "must be positive"));
    }
    Ok(Solver {
        scheme,
        output_times,
        kernel,
        max_step,
    })
}

fn named_operator(name: &str, model: &Model) -> Option<Operator> {
    let n = model.dim();
    let qubit = n == 2;
    Some(match name {
        "sigma_x" if qubit => ops::pauli_x(),
        "sigma_y" if qubit => ops::pauli_y(),
        "sigma_z" if qubit => ops::pauli_z(),
        "sigma_plus" if qubit => ops::sigma_plus(),
        "sigma_minus" if qubit => ops::sigma_minus(),
        "number" => ops::number(n),
        "identity" => oqs_core::liouville::identity(n),
        "hamiltonian" => model.h.clone(),
        s if s.starts_with("projector:") => {
            let k: usize = s[10..].trim().parse().ok()?;
            if k >= n {
                return None;
            }
            projector(&ops::basis_ket(n, k))
        }
        _ => return None,
    })
}

fn parse_observables(ini: &Ini, model: &Model) -> Result<Vec<(String, Operator)>, ConfigError> {
    let v = View::open(ini, "observables");
    let n = model.dim();
    if !v.present() {
        return Ok((0..n)
            .map(|k| (format!("p{k}"), projector(&ops::basis_ket(n, k))))
            .collect());
    }
    let mut out = Vec::new();
    for e in v.entries() {
        let op = match named_operator(&e.value, model) {
            Some(op) => op,
            None if e.value.ends_with(".csv") => v.matrix(&e.key, &e.value)?,
            None => {
                return Err(v.err(
                    &e.key,
                    format!(
                        "unknown observable `{}`; use sigma_x|y|z, sigma_plus|minus (qubits), number, identity, hamiltonian, projector:k or a .csv file",
                        e.value
                    ),
                ))
            }
        };
        if op.nrows() != n || op.ncols() != n {
            return Err(v.err(
                &e.key,
                format!("observable is {}x{}, model dimension is {n}", op.nrows(), op.ncols()),
            ));
        }
        out.push((e.key.clone(), op));
    }
    Ok(out)
}

fn parse_checks(ini: &Ini) -> Result<Checks, ConfigError> {
    let v = View::new(ini, "checks", &["run", "family", "partitions"])?;
    let run = v
        .list("run")
        .into_iter()
        .map(|s| match s {
            "cp" => Ok(CheckKind::Cp),
            "markov" => Ok(CheckKind::Markov),
            "kossakowski" => Ok(CheckKind::Kossakowski),
            "spohn" => Ok(CheckKind::Spohn),
            "relaxing" => Ok(CheckKind::Relaxing),
            other => Err(v.err(
                "run",
                format!("unknown check `{other}`; expected cp, markov, kossakowski, spohn or relaxing"),
            )),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Checks {
        run,
        family: v.str("family").map(|f| v.path(f)),
        partitions: v.usize("partitions")?.unwrap_or(20),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ini(text: &str) -> Result<Ini, ConfigError> {
        Ini::parse(Path::new("test.ini"), text)
    }

    #[test]
    fn reports_line_of_bad_entry() {
        let e = ini("[model]\npreset = damped_qubit\nnonsense\n").unwrap_err();
        assert_eq!(e.line, Some(3));
        let e = ini("orphan = 1\n").unwrap_err();
        assert!(e.msg.contains("outside"));
        let e = ini("[model]\na = 1\na = 2\n").unwrap_err();
        assert_eq!(e.line, Some(3));
    }

    #[test]
    fn comments_and_case() {
        let i = ini("# header\n[Model]\nPreset = damped_qubit # trailing\n; other\n").unwrap();
        let c = RunConfig::from_ini(&i).unwrap();
        assert_eq!(c.model.name, "damped_qubit");
        assert_eq!(c.solver.output_times, vec![0.0]);
        assert_eq!(c.observables.len(), 2);
    }

    #[test]
    fn typed_errors_name_the_key() {
        let i = ini("[model]\npreset = damped_qubit\n[solver]\nt_final = abc\n").unwrap();
        let e = RunConfig::from_ini(&i).unwrap_err();
        assert_eq!(e.key.as_deref(), Some("solver.t_final"));
        assert_eq!(e.line, Some(4));
        let i = ini("[model]\npreset = damped_qubit\n[solver]\noutput_times = 0, 2, 1\n").unwrap();
        assert!(RunConfig::from_ini(&i).unwrap_err().msg.contains("ascending"));
        let i = ini("[model]\npreset = damped_qubit\n[bath]\ntype = ohmic\n").unwrap();
        assert_eq!(RunConfig::from_ini(&i).unwrap_err().key.as_deref(), Some("bath.t"));
        let i = ini("[model]\npreset = damped_qubit\n[extra]\n").unwrap();
        assert!(RunConfig::from_ini(&i).unwrap_err().msg.contains("unknown section"));
    }

    #[test]
    fn oscillator_levels_and_states() {
        let i = ini("[model]\npreset = damped_oscillator(4)\n[state]\ninitial = excited\n").unwrap();
        let c = RunConfig::from_ini(&i).unwrap();
        assert_eq!(c.model.dim(), 4);
        assert!((c.initial.op()[(3, 3)].re - 1.0).abs() < 1e-12);
        let i = ini("[model]\npreset = damped_qubit\n[state]\ninitial = excited\n").unwrap();
        let c = RunConfig::from_ini(&i).unwrap();
        assert!((c.initial.op()[(0, 0)].re - 1.0).abs() < 1e-12);
        let i = ini("[model]\npreset = damped_qubit\n[state]\ninitial = basis:2\n").unwrap();
        assert!(RunConfig::from_ini(&i).is_err());
    }

    #[test]
    fn kernel_required_for_memory_schemes() {
        let i = ini("[model]\npreset = damped_qubit\n[solver]\nscheme = memory_kernel\n").unwrap();
        assert!(RunConfig::from_ini(&i).is_err());
        let i = ini("[model]\npreset = damped_qubit\n[solver]\nscheme = memory_kernel\ng = 4\n").unwrap();
        assert!(RunConfig::from_ini(&i).is_ok());
    }
}
