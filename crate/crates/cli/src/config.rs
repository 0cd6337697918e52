//! Experiment configuration: a sectioned key-value file (TOML) with schema
//! versioning, JSON accepted as an alternative. The resolved config has a
//! canonical JSON form whose SHA-256 hash stamps every output record.

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

use qudit_qaoa::problems::{
    instances, EvChargingProblem, GraphColoringProblem, JobShopObjective, JobShopProblem,
    KnapsackProblem, PartitionProblem,
};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ExperimentConfig {
    pub schema: u32,
    pub problem: ProblemConfig,
    #[serde(default)]
    pub circuit: CircuitConfig,
    #[serde(default)]
    pub optimizer: OptimizerSection,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ProblemConfig {
    GraphColoring {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        num_nodes: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        edges: Option<Vec<(usize, usize)>>,
        /// Named bundled graph: triangle | path<n> | cycle<n> | wheel<n> | octahedron
        #[serde(default, skip_serializing_if = "Option::is_none")]
        graph: Option<String>,
        /// Edge-list file, `u v` per line, 0-based.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        graph_file: Option<PathBuf>,
        num_colors: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        color_costs: Option<Vec<f64>>,
        conflict_weight: f64,
    },
    EvCharging {
        num_vehicles: usize,
        num_steps: usize,
        step_hours: f64,
        powers: Vec<f64>,
        buy_prices: Vec<f64>,
        sell_prices: Vec<f64>,
        #[serde(default)]
        losses: Option<Vec<f64>>,
        energy_init: Vec<f64>,
        energy_target: Vec<f64>,
        energy_min: Vec<f64>,
        energy_max: Vec<f64>,
        power_min: f64,
        power_max: f64,
        #[serde(default = "default_levels")]
        levels: usize,
    },
    Knapsack {
        weights: Vec<f64>,
        values: Vec<f64>,
        copies: usize,
        capacity: f64,
    },
    Partition {
        numbers: Vec<u64>,
        num_subsets: usize,
    },
    Jobshop {
        num_jobs: usize,
        ops_per_job: usize,
        num_machines: usize,
        horizon: usize,
        durations: Vec<Vec<usize>>,
        machine_of: Vec<Vec<usize>>,
        #[serde(default = "default_objective")]
        objective: String,
    },
}

fn default_levels() -> usize {
    3
}

fn default_objective() -> String {
    "average_completion".into()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintMode {
    None,
    ClassicalLoop,
    HamiltonianPenalty,
    Conditional,
    DynamicalDecoupling,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MixerKindConfig {
    StandardLx,
    DynamicalDecoupling,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CircuitConfig {
    /// Single depth; ignored when `p_list` is set.
    #[serde(default = "default_p")]
    pub p: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_list: Option<Vec<usize>>,
    #[serde(default = "default_mixer")]
    pub mixer: MixerKindConfig,
    #[serde(default = "default_mixer_scale")]
    pub mixer_scale: f64,
    #[serde(default = "default_mode")]
    pub constraint_mode: ConstraintMode,
    /// Number K of candidate solutions extracted from the final state.
    #[serde(default = "default_candidates")]
    pub candidates: usize,
    /// Optional shot count; exact expectation values when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<usize>,
    /// Trajectories per objective evaluation in conditional mode.
    #[serde(default = "default_trajectories")]
    pub trajectories: usize,
    /// Penalty weight applied to every problem constraint.
    #[serde(default = "default_penalty_weight")]
    pub penalty_weight: f64,
}

fn default_p() -> usize {
    1
}
fn default_mixer() -> MixerKindConfig {
    MixerKindConfig::StandardLx
}
fn default_mixer_scale() -> f64 {
    1.0
}
fn default_mode() -> ConstraintMode {
    ConstraintMode::None
}
fn default_candidates() -> usize {
    10
}
fn default_trajectories() -> usize {
    256
}
fn default_penalty_weight() -> f64 {
    20.0
}

impl Default for CircuitConfig {
    fn default() -> Self {
        Self {
            p: default_p(),
            p_list: None,
            mixer: default_mixer(),
            mixer_scale: default_mixer_scale(),
            constraint_mode: default_mode(),
            candidates: default_candidates(),
            shots: None,
            trajectories: default_trajectories(),
            penalty_weight: default_penalty_weight(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    CmaEs,
    Lbfgs,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct OptimizerSection {
    #[serde(default = "default_method")]
    pub method: Method,
    /// Runs per depth; defaults to 50 for CMA-ES and 300 for L-BFGS.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runs: Option<usize>,
    #[serde(default = "default_master_seed")]
    pub master_seed: u64,
    #[serde(default = "default_budget")]
    pub budget: u64,
    #[serde(default = "default_max_generations")]
    pub max_generations: usize,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    /// CMA-ES population; 0 means the dimension-dependent default.
    #[serde(default)]
    pub population: usize,
    #[serde(default = "default_initial_step")]
    pub initial_step: f64,
    #[serde(default = "default_fd_step")]
    pub fd_step: f64,
    #[serde(default = "default_gradient_tolerance")]
    pub gradient_tolerance: f64,
    #[serde(default = "default_gamma_range")]
    pub gamma_range: (f64, f64),
    #[serde(default = "default_beta_range")]
    pub beta_range: (f64, f64),
}

fn default_method() -> Method {
    Method::CmaEs
}
fn default_master_seed() -> u64 {
    1
}
fn default_budget() -> u64 {
    20_000
}
fn default_max_generations() -> usize {
    500
}
fn default_max_iterations() -> usize {
    200
}
fn default_initial_step() -> f64 {
    0.3
}
fn default_fd_step() -> f64 {
    1e-5
}
fn default_gradient_tolerance() -> f64 {
    1e-8
}
fn default_gamma_range() -> (f64, f64) {
    (0.0, 2.0 * std::f64::consts::PI)
}
fn default_beta_range() -> (f64, f64) {
    (0.0, std::f64::consts::PI)
}

impl Default for OptimizerSection {
    fn default() -> Self {
        Self {
            method: default_method(),
            runs: None,
            master_seed: default_master_seed(),
            budget: default_budget(),
            max_generations: default_max_generations(),
            max_iterations: default_max_iterations(),
            population: 0,
            initial_step: default_initial_step(),
            fd_step: default_fd_step(),
            gradient_tolerance: default_gradient_tolerance(),
            gamma_range: default_gamma_range(),
            beta_range: default_beta_range(),
        }
    }
}

impl OptimizerSection {
    pub fn effective_runs(&self) -> usize {
        self.runs.unwrap_or(match self.method {
            Method::CmaEs => 50,
            Method::Lbfgs => 300,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct OutputConfig {
    #[serde(default = "default_directory")]
    pub directory: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<String>,
}

fn default_directory() -> PathBuf {
    PathBuf::from("out")
}
fn default_formats() -> Vec<String> {
    vec!["json".into(), "csv".into()]
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: default_directory(),
            formats: default_formats(),
        }
    }
}

impl ExperimentConfig {
    /// Parse TOML (default) or JSON (by extension or a leading brace).
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let is_json = path.extension().is_some_and(|e| e == "json")
            || text.trim_start().starts_with('{');
        let config: Self = if is_json {
            serde_json::from_str(&text).context("parsing JSON config")?
        } else {
            toml::from_str(&text).context("parsing TOML config")?
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA_VERSION {
            bail!(
                "config schema {} unsupported (this build reads schema {SCHEMA_VERSION})",
                self.schema
            );
        }
        for p in self.depths() {
            if p == 0 {
                bail!("circuit depth p must be at least 1");
            }
        }
        if self.circuit.candidates == 0 {
            bail!("circuit.candidates (K) must be at least 1");
        }
        if self.circuit.constraint_mode == ConstraintMode::DynamicalDecoupling
            && self.circuit.mixer != MixerKindConfig::DynamicalDecoupling
        {
            bail!("constraint_mode = dynamical_decoupling requires mixer = dynamical_decoupling");
        }
        if self.circuit.mixer == MixerKindConfig::DynamicalDecoupling
            && self.circuit.constraint_mode != ConstraintMode::DynamicalDecoupling
        {
            bail!("the dynamical-decoupling mixer needs constraint_mode = dynamical_decoupling");
        }
        if self.optimizer.method == Method::CmaEs {
            let pop = if self.optimizer.population == 0 {
                6 // smallest dimension-dependent default (p = 1)
            } else {
                self.optimizer.population
            };
            if self.optimizer.budget <= pop as u64 {
                bail!("optimizer.budget must exceed the CMA-ES population");
            }
        }
        Ok(())
    }

    pub fn depths(&self) -> Vec<usize> {
        match &self.circuit.p_list {
            Some(list) if !list.is_empty() => list.clone(),
            _ => vec![self.circuit.p],
        }
    }

    /// Canonical JSON form of the fully resolved config.
    pub fn canonical(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// SHA-256 over the canonical form.
    pub fn hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.canonical().as_bytes());
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// A problem instance constructed from its config block.
pub enum BuiltProblem {
    GraphColoring(GraphColoringProblem),
    EvCharging(EvChargingProblem),
    Knapsack(KnapsackProblem),
    Partition(PartitionProblem),
    Jobshop(JobShopProblem),
}

impl BuiltProblem {
    pub fn as_problem(&self) -> &dyn qudit_qaoa::problems::Problem {
        match self {
            BuiltProblem::GraphColoring(p) => p,
            BuiltProblem::EvCharging(p) => p,
            BuiltProblem::Knapsack(p) => p,
            BuiltProblem::Partition(p) => p,
            BuiltProblem::Jobshop(p) => p,
        }
    }
}

fn named_graph(name: &str) -> Result<Vec<(usize, usize)>> {
    if let Some(rest) = name.strip_prefix("path") {
        let n: usize = rest.parse().context("path<n> needs a node count")?;
        return Ok(instances::path(n));
    }
    if let Some(rest) = name.strip_prefix("cycle") {
        let n: usize = rest.parse().context("cycle<n> needs a node count")?;
        return Ok(instances::cycle(n));
    }
    if let Some(rest) = name.strip_prefix("wheel") {
        let n: usize = rest.parse().context("wheel<n> needs a node count")?;
        return Ok(instances::wheel(n));
    }
    match name {
        "triangle" => Ok(instances::triangle()),
        "octahedron" => Ok(instances::octahedron()),
        other => bail!("unknown bundled graph `{other}`"),
    }
}

pub fn build_problem(config: &ProblemConfig, base_dir: &Path) -> Result<BuiltProblem> {
    match config {
        ProblemConfig::GraphColoring {
            num_nodes,
            edges,
            graph,
            graph_file,
            num_colors,
            color_costs,
            conflict_weight,
        } => {
            let edges = if let Some(e) = edges {
                e.clone()
            } else if let Some(name) = graph {
                named_graph(name)?
            } else if let Some(file) = graph_file {
                let path = if file.is_absolute() {
                    file.clone()
                } else {
                    base_dir.join(file)
                };
                let text = std::fs::read_to_string(&path)
                    .with_context(|| format!("reading graph file {}", path.display()))?;
                instances::parse_edge_list(&text)?
            } else {
                bail!("graph coloring needs `edges`, `graph`, or `graph_file`");
            };
            let nodes = num_nodes.unwrap_or_else(|| instances::node_count(&edges));
            let costs = color_costs
                .clone()
                .unwrap_or_else(|| vec![0.0; *num_colors]);
            Ok(BuiltProblem::GraphColoring(GraphColoringProblem::new(
                nodes,
                edges,
                *num_colors,
                costs,
                *conflict_weight,
            )?))
        }
        ProblemConfig::EvCharging {
            num_vehicles,
            num_steps,
            step_hours,
            powers,
            buy_prices,
            sell_prices,
            losses,
            energy_init,
            energy_target,
            energy_min,
            energy_max,
            power_min,
            power_max,
            levels,
        } => {
            let problem = EvChargingProblem {
                num_vehicles: *num_vehicles,
                num_steps: *num_steps,
                step_hours: *step_hours,
                powers: powers.clone(),
                buy_prices: buy_prices.clone(),
                sell_prices: sell_prices.clone(),
                losses: losses.clone().unwrap_or_else(|| vec![0.0; *num_vehicles]),
                energy_init: energy_init.clone(),
                energy_target: energy_target.clone(),
                energy_min: energy_min.clone(),
                energy_max: energy_max.clone(),
                power_min: *power_min,
                power_max: *power_max,
                levels: *levels,
            };
            problem.validate()?;
            Ok(BuiltProblem::EvCharging(problem))
        }
        ProblemConfig::Knapsack {
            weights,
            values,
            copies,
            capacity,
        } => Ok(BuiltProblem::Knapsack(KnapsackProblem::new(
            weights.clone(),
            values.clone(),
            *copies,
            *capacity,
        )?)),
        ProblemConfig::Partition {
            numbers,
            num_subsets,
        } => Ok(BuiltProblem::Partition(PartitionProblem::new(
            numbers.clone(),
            *num_subsets,
        )?)),
        ProblemConfig::Jobshop {
            num_jobs,
            ops_per_job,
            num_machines,
            horizon,
            durations,
            machine_of,
            objective,
        } => {
            let objective = match objective.as_str() {
                "average_completion" => JobShopObjective::AverageCompletion,
                "makespan" => JobShopObjective::Makespan,
                other => bail!("unknown job-shop objective `{other}`"),
            };
            let problem = JobShopProblem {
                num_jobs: *num_jobs,
                ops_per_job: *ops_per_job,
                num_machines: *num_machines,
                horizon: *horizon,
                durations: durations.clone(),
                machine_of: machine_of.clone(),
                objective,
            };
            problem.validate()?;
            Ok(BuiltProblem::Jobshop(problem))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOML_EXAMPLE: &str = r#"
schema = 1

[problem]
type = "graph_coloring"
graph = "octahedron"
num_colors = 3
color_costs = [0.0, 1.0, 2.0]
conflict_weight = 20.0

[circuit]
p = 2
constraint_mode = "none"
candidates = 12

[optimizer]
method = "cma_es"
runs = 5
master_seed = 9
"#;

    #[test]
    fn toml_round_trip_hash_stable() {
        let config: ExperimentConfig = toml::from_str(TOML_EXAMPLE).unwrap();
        config.validate().unwrap();
        let canon = config.canonical();
        let back: ExperimentConfig = serde_json::from_str(&canon).unwrap();
        assert_eq!(back.canonical(), canon);
        assert_eq!(back.hash(), config.hash());
        assert_eq!(config.circuit.candidates, 12);
        assert_eq!(config.optimizer.effective_runs(), 5);
    }

    #[test]
    fn json_alternative_accepted() {
        let config: ExperimentConfig = toml::from_str(TOML_EXAMPLE).unwrap();
        let json = config.canonical();
        let from_json: ExperimentConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(from_json, config);
    }

    #[test]
    fn schema_version_enforced() {
        let bad = TOML_EXAMPLE.replace("schema = 1", "schema = 2");
        let config: ExperimentConfig = toml::from_str(&bad).unwrap();
        assert!(config.validate().is_err());
    }

    #[test]
    fn lbfgs_default_runs() {
        let toml = TOML_EXAMPLE
            .replace("method = \"cma_es\"", "method = \"lbfgs\"")
            .replace("runs = 5\n", "");
        let config: ExperimentConfig = toml::from_str(&toml).unwrap();
        assert_eq!(config.optimizer.effective_runs(), 300);
    }

    #[test]
    fn named_graphs_resolve() {
        assert_eq!(named_graph("triangle").unwrap().len(), 3);
        assert_eq!(named_graph("octahedron").unwrap().len(), 12);
        assert_eq!(named_graph("path4").unwrap().len(), 3);
        assert_eq!(named_graph("cycle5").unwrap().len(), 5);
        assert!(named_graph("nope").is_err());
    }

    #[test]
    fn dd_mode_requires_dd_mixer() {
        let bad = TOML_EXAMPLE.replace(
            "constraint_mode = \"none\"",
            "constraint_mode = \"dynamical_decoupling\"",
        );
        let config: ExperimentConfig = toml::from_str(&bad).unwrap();
        assert!(config.validate().is_err());
    }
}
