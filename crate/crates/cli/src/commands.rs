//! One method per subcommand. Each returns its summary line and exit code.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use coarse_lab::cayley::{build_ball, Ball};
use coarse_lab::covers::{
    agglomerate, asdim_at_scale, check_definition1, make_brick_cover_z2, make_interval_cover_z,
    make_lamplighter_cover, make_strip_cover_z2, multiplicity, net_partition, proximity_color, Cover, Def1Outcome,
};
use coarse_lab::ends::ends_estimate;
use coarse_lab::geodesics::{bi_infinite_witness, enumerate_geodesics, extendable_prefixes};
use coarse_lab::models::{model_from_descriptor, GroupModel};
use coarse_lab::presentation::{Presentation, Word};
use coarse_lab::refuter::{
    find_violation, paper_constants, zero_dim_refute, DeskScale, RefuteOutcome, RefuteParams, RefutationWitness,
    TraceStep, INTERVAL_CONVENTION,
};
use coarse_lab::vankampen::{area, build_diagram, diagram_map, render_svg, Diagram, SearchBounds};
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::output::{write_atomic, Artifacts, LinePlot};
use crate::CliError;

type Outcome = Result<(String, u8), CliError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum CoverKind {
    /// Intervals of Z of length L
    Interval,
    /// Shifted L x L bricks of Z^2, three classes
    Brick,
    /// Vertical strips of Z^2 of width L, two classes
    Strips,
    /// Lamplighter pieces with window L and margin d
    Lamplighter,
    /// Greedy net cells of diameter at most D, one class
    Net,
    /// Random merges of net cells, two random classes (uses --seed)
    Agglomerate,
}

pub struct Context {
    cfg: RunConfig,
    model: GroupModel,
    art: Artifacts,
}

fn json<T: Serialize>(v: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| CliError::Internal(format!("serialise: {e}")))?;
    s.push('\n');
    Ok(s)
}

fn trace_rows(trace: &[TraceStep]) -> Vec<Vec<String>> {
    trace
        .iter()
        .map(|s| vec![s.step.to_string(), s.name.clone(), s.passed.to_string(), s.detail.clone()])
        .collect()
}

fn curve(points: impl IntoIterator<Item = (u64, u64)>) -> Vec<(f64, f64)> {
    points.into_iter().map(|(x, y)| (x as f64, y as f64)).collect()
}

impl Context {
    pub fn new(cfg: RunConfig) -> Result<Self, CliError> {
        let model = model_from_descriptor(&cfg.model)?;
        let rendered = cfg.render();
        let mut art = Artifacts::new(cfg.out.clone(), &rendered);
        art.text("config.txt", &rendered)?;
        Ok(Context { cfg, model, art })
    }

    /// Writes the failure, the effective config and the artifacts so far.
    pub fn dump_diagnostic(&mut self, message: &str) {
        let mut s = format!("error: {message}\n\n# effective config\n{}\n# artifacts\n", self.cfg.render());
        for p in &self.art.written {
            let _ = writeln!(s, "{}", p.display());
        }
        let path = self.cfg.out.join("diagnostic.txt");
        if write_atomic(&path, s.as_bytes()).is_ok() {
            eprintln!("coarse-lab: diagnostic dump in {}", path.display());
        }
    }

    fn cache_path(&self, radius: u32) -> Option<PathBuf> {
        let dir = self.cfg.cache_dir.as_ref()?;
        let h = Sha256::digest(self.model.descriptor().as_bytes());
        let tag: String = h.iter().take(8).map(|b| format!("{b:02x}")).collect();
        Some(dir.join(format!("ball-{tag}-r{radius}.json")))
    }

    /// The ball of `radius`, from the cache when a valid copy is there.
    fn ball_of(&self, radius: u32) -> Result<Ball, CliError> {
        let cache = self.cache_path(radius);
        if let Some(path) = &cache {
            if let Ok(text) = std::fs::read_to_string(path) {
                match Ball::from_json(&self.model, &text) {
                    Ok(b) if b.radius() == radius => return Ok(b),
                    Ok(_) => eprintln!("coarse-lab: {} has the wrong radius, rebuilding", path.display()),
                    Err(e) => eprintln!("coarse-lab: {}: {e}, rebuilding", path.display()),
                }
            }
        }
        let ball = build_ball(&self.model, radius, self.cfg.budget_vertices)?;
        if let Some(path) = &cache {
            write_atomic(path, ball.to_json().as_bytes())?;
        }
        Ok(ball)
    }

    fn presentation(&self) -> Result<&Presentation, CliError> {
        Ok(self.model.require_presentation()?)
    }

    fn bounds(&self) -> SearchBounds {
        SearchBounds {
            max_factors: self.cfg.max_factors,
            max_nodes: self.cfg.max_nodes,
            ..SearchBounds::default()
        }
    }

    fn word(&self, text: &str) -> Result<Word, CliError> {
        Ok(self.model.generators().parse_word(text)?)
    }

    fn growth(&mut self, ball: &Ball) -> Result<(), CliError> {
        let spheres = ball.sphere_sizes();
        let mut total = 0;
        let mut rows = Vec::new();
        let mut pts = Vec::new();
        for (r, &s) in spheres.iter().enumerate() {
            total += s;
            rows.push(vec![r.to_string(), s.to_string(), total.to_string()]);
            pts.push((r as u64, total));
        }
        self.art.csv("growth.csv", &["r", "sphere", "ball"], &rows)?;
        self.art.plot(
            "growth.svg",
            &LinePlot {
                title: format!("|B(e,r)| in {}", self.model.descriptor()),
                x_label: "r".into(),
                y_label: "vertices".into(),
                points: curve(pts),
            },
        )?;
        Ok(())
    }

    pub fn ball(&mut self, stat: bool) -> Outcome {
        let ball = self.ball_of(self.cfg.radius)?;
        if !stat {
            self.growth(&ball)?;
        }
        Ok((format!("{} vertices", ball.len()), 0))
    }

    fn ends_tables(&mut self) -> Result<String, CliError> {
        let est = ends_estimate(&self.model, &self.cfg.schedule, self.cfg.margin, self.cfg.budget_vertices)?;
        let rows: Vec<Vec<String>> = est
            .reports
            .iter()
            .map(|r| {
                vec![
                    r.inner.to_string(),
                    r.outer.to_string(),
                    r.components.len().to_string(),
                    r.end_count_estimate.to_string(),
                ]
            })
            .collect();
        self.art.csv("ends.csv", &["r", "R", "components", "ends"], &rows)?;
        self.art.plot(
            "ends.svg",
            &LinePlot {
                title: format!("end counts, {}", self.model.descriptor()),
                x_label: "R".into(),
                y_label: "ends".into(),
                points: curve(est.reports.iter().map(|r| (u64::from(r.outer), r.end_count_estimate as u64))),
            },
        )?;
        let counts: Vec<String> = est.counts().iter().map(usize::to_string).collect();
        Ok(format!("verdict {} (counts {})", est.verdict, counts.join(",")))
    }

    pub fn ends(&mut self) -> Outcome {
        Ok((self.ends_tables()?, 0))
    }

    pub fn geodesics(&mut self, n: usize, depth: usize) -> Outcome {
        if n == 0 {
            return Err(CliError::Usage("--n must be positive".into()));
        }
        let cap = self.cfg.geodesic_cap;
        let gens = self.model.generators().clone();
        let mut rows = Vec::new();
        for k in 1..=n {
            let all = enumerate_geodesics(&self.model, k, cap)?;
            let ext = extendable_prefixes(&self.model, k, depth.max(k), cap)?;
            rows.push(vec![
                k.to_string(),
                all.paths.len().to_string(),
                ext.paths.len().to_string(),
                (all.truncated || ext.truncated).to_string(),
            ]);
        }
        self.art.csv("geodesic_counts.csv", &["n", "geodesics", "extendable", "truncated"], &rows)?;
        let all = enumerate_geodesics(&self.model, n, cap)?;
        let ext = extendable_prefixes(&self.model, n, depth.max(n), cap)?;
        let list: Vec<Vec<String>> = all
            .paths
            .iter()
            .map(|w| vec![gens.render_compact(w), ext.paths.binary_search(w).is_ok().to_string()])
            .collect();
        self.art.csv("geodesics.csv", &["word", "extendable"], &list)?;
        let w = bi_infinite_witness(&self.model, n)?;
        let verified = w.verify(&self.model);
        if !verified {
            return Err(CliError::Internal(format!("bi-infinite witness for n = {n} fails its distance check")));
        }
        let doc = json!({
            "n": n,
            "labels": gens.render_compact(&w.labels),
            "start": self.model.canonical_key(&w.start),
            "end": self.model.canonical_key(&w.end),
            "verified": verified,
        });
        self.art.text("witness.json", &json(&doc)?)?;
        Ok((
            format!(
                "{} geodesics of length {n}, {} extend to {}; witness verified",
                all.paths.len(),
                ext.paths.len(),
                depth.max(n)
            ),
            0,
        ))
    }

    pub fn cover_make(&mut self, kind: CoverKind, len: Option<i64>) -> Outcome {
        let ball = self.ball_of(self.cfg.radius)?;
        let m = &self.model;
        let len = || len.ok_or_else(|| CliError::Usage("this cover needs --len".into()));
        let bound = || self.cfg.bound.ok_or_else(|| CliError::Usage("this cover needs --D".into()));
        let cover = match kind {
            CoverKind::Interval => make_interval_cover_z(&ball, m, len()?)?,
            CoverKind::Brick => make_brick_cover_z2(&ball, m, len()?)?,
            CoverKind::Strips => make_strip_cover_z2(&ball, m, len()?)?,
            CoverKind::Lamplighter => {
                let d = self.cfg.d.ok_or_else(|| CliError::Usage("lamplighter cover needs --d".into()))?;
                make_lamplighter_cover(&ball, m, len()?, d as i64)?
            }
            CoverKind::Net => net_partition(&ball, m, bound()?)?,
            CoverKind::Agglomerate => agglomerate(&ball, m, bound()?, self.cfg.seed)?,
        };
        let cover = match self.cfg.d {
            Some(d) if kind != CoverKind::Lamplighter => Cover { d, ..cover },
            _ => cover,
        };
        cover.validate(&ball).map_err(|e| CliError::Internal(format!("constructed cover: {e}")))?;
        self.art.text("cover.json", &(cover.to_json() + "\n"))?;
        Ok((
            format!(
                "{} pieces, {} classes, d = {}, D = {}",
                cover.len(),
                cover.class_count(),
                cover.d,
                cover.bound
            ),
            0,
        ))
    }

    pub fn cover_check(&mut self, cover: &Cover) -> Outcome {
        let ball = self.ball_of(cover.ball.radius)?;
        let (d, bound) = (self.cfg.d.unwrap_or(cover.d), self.cfg.bound.unwrap_or(cover.bound));
        let out = check_definition1(&ball, &self.model, cover, d, bound)?;
        if let Def1Outcome::Violation(v) = &out {
            if !v.verify(&ball, &self.model, cover, d, bound) {
                return Err(CliError::Internal("violation fails re-verification".into()));
            }
        }
        let doc = json!({ "d": d, "D": bound, "outcome": out });
        self.art.text("check.json", &json(&doc)?)?;
        let summary = match &out {
            Def1Outcome::Pass { realized_diameter } => {
                format!("pass at d = {d}, D = {bound} (realized diameter {realized_diameter})")
            }
            Def1Outcome::Violation(v) => format!(
                "{:?} violation: {} and {} at distance {}",
                v.kind,
                ball.key(v.u),
                ball.key(v.v),
                v.distance
            )
            .to_lowercase(),
        };
        Ok((summary, 0))
    }

    pub fn cover_color(&mut self, cover: &Cover) -> Outcome {
        let ball = self.ball_of(cover.ball.radius)?;
        let d = self.cfg.d.unwrap_or(cover.d);
        let (colored, coloring) = proximity_color(&ball, &self.model, cover, d, self.cfg.exact_limit)?;
        self.art.text("colored.json", &(colored.to_json() + "\n"))?;
        self.art.text("coloring.json", &json(&coloring)?)?;
        let how = if coloring.exact { "exact" } else { "greedy" };
        Ok((format!("{} colours ({how}) at d = {d}", coloring.count), 0))
    }

    pub fn cover_multiplicity(&mut self, cover: &Cover) -> Outcome {
        let ball = self.ball_of(cover.ball.radius)?;
        let mut rows = Vec::new();
        let mut pts = Vec::new();
        for &d in &self.cfg.scales {
            let r = multiplicity(&ball, &self.model, cover, d)?;
            rows.push(vec![d.to_string(), r.k.to_string(), ball.key(r.argmax).to_string()]);
            pts.push((d, r.k as u64));
        }
        self.art.csv("multiplicity.csv", &["d", "multiplicity", "center"], &rows)?;
        self.art.plot(
            "multiplicity.svg",
            &LinePlot {
                title: "d-multiplicity".into(),
                x_label: "d".into(),
                y_label: "pieces met".into(),
                points: curve(pts.iter().copied()),
            },
        )?;
        let ks: Vec<String> = pts.iter().map(|&(d, k)| format!("{d}:{k}")).collect();
        Ok((format!("multiplicity {}", ks.join(" ")), 0))
    }

    fn checked_diagram(&mut self, p: &Presentation, w: &Word, d: &Diagram) -> Result<serde_json::Value, CliError> {
        let check = d.check(p, w);
        let map = diagram_map(d, &self.model, &self.model.identity())?;
        if !check.all() || !map.lipschitz.violations.is_empty() {
            return Err(CliError::Internal(format!(
                "diagram fails its checks: {check:?}, {} Lipschitz violations",
                map.lipschitz.violations.len()
            )));
        }
        Ok(json!({
            "word": p.generators().render_compact(w),
            "faces": d.face_count(),
            "vertices": d.vertex_count(),
            "edges": d.edge_count(),
            "check": check,
            "lipschitz": map.lipschitz,
        }))
    }

    pub fn vk_build(&mut self, word: &str) -> Outcome {
        let p = self.presentation()?.clone();
        let w = self.word(word)?;
        let d = build_diagram(&p, &self.model, &w, self.bounds())?;
        let report = self.checked_diagram(&p, &w, &d)?;
        self.art.text("diagram.json", &(d.to_json() + "\n"))?;
        self.art.text("check.json", &json(&report)?)?;
        let svg = render_svg(&d, &p, &self.art.stamp);
        self.art.text("diagram.svg", &svg)?;
        Ok((
            format!(
                "{} faces, {} vertices, {} edges; all checks pass",
                d.face_count(),
                d.vertex_count(),
                d.edge_count()
            ),
            0,
        ))
    }

    pub fn vk_area(&mut self, word: &str) -> Outcome {
        let p = self.presentation()?.clone();
        let w = self.word(word)?;
        let r = area(&p, &self.model, &w, self.bounds())?;
        self.art.text("area.json", &json(&r)?)?;
        let lb = r.lower_bound.map(|b| format!(", lower bound {b}")).unwrap_or_default();
        let exact = if r.exact { ", exact" } else { ", upper bound" };
        Ok((format!("area {}{lb}{exact}", r.area), 0))
    }

    pub fn vk_render(&mut self, path: &Path) -> Outcome {
        let p = self.presentation()?.clone();
        let text = std::fs::read_to_string(path).map_err(|e| CliError::input(path, e))?;
        let d = Diagram::from_json(&text).map_err(|e| CliError::input(path, e))?;
        let w = d.boundary_word();
        self.checked_diagram(&p, &w, &d)?;
        let svg = render_svg(&d, &p, &self.art.stamp);
        self.art.text("diagram.svg", &svg)?;
        Ok((format!("rendered {} faces", d.face_count()), 0))
    }

    fn witness_out(&mut self, w: &RefutationWitness, ball: &Ball, cover: &Cover) -> Outcome {
        if !w.verify(ball, &self.model, cover) {
            return Err(CliError::Internal(format!("{:?} witness fails re-verification", w.kind)));
        }
        self.art.text("witness.json", &(w.to_json() + "\n"))?;
        self.art.csv("trace.csv", &["step", "name", "passed", "detail"], &trace_rows(&w.trace))?;
        Ok((format!("witness {} (verified)", json_kind(w)), 0))
    }

    pub fn refute(&mut self, cover: &Cover) -> Outcome {
        let ball = self.ball_of(cover.ball.radius)?;
        let d = self.cfg.d.unwrap_or(cover.d);
        if cover.class_count() <= 1 {
            let w = zero_dim_refute(&ball, &self.model, cover, d)?;
            return self.witness_out(&w, &ball, cover);
        }
        let p = self.presentation()?.clone();
        let params = RefuteParams {
            d,
            n_used: self.cfg.n_used,
            x0: 0,
            search: self.bounds(),
        };
        match find_violation(&p, &self.model, &ball, cover, params)? {
            RefuteOutcome::Witness(w) => self.witness_out(&w, &ball, cover),
            RefuteOutcome::Inconclusive {
                step,
                diagnostics,
                trace,
            } => {
                let doc = json!({
                    "step": step,
                    "diagnostics": diagnostics,
                    "interval_convention": INTERVAL_CONVENTION,
                    "trace": trace,
                });
                self.art.text("inconclusive.json", &json(&doc)?)?;
                self.art.csv("trace.csv", &["step", "name", "passed", "detail"], &trace_rows(&trace))?;
                Ok((format!("inconclusive at {step}: {diagnostics}"), 2))
            }
        }
    }

    pub fn constants(&mut self) -> Outcome {
        let bound = self.cfg.bound.ok_or_else(|| CliError::Usage("constants needs --D".into()))?;
        let desk = DeskScale {
            d_used: self.cfg.d.unwrap_or(DeskScale::default().d_used),
            n_used: self.cfg.n_used,
            r_used: self.cfg.radius,
        };
        let c = paper_constants(self.presentation()?, bound, desk)?;
        self.art.text("constants.json", &json(&c)?)?;
        let digits = c.n.to_str_radix(10).len();
        Ok((
            format!("M = {}, d threshold = {}, N has {digits} digits", c.m, c.d_threshold),
            0,
        ))
    }

    pub fn report(&mut self) -> Outcome {
        let ball = self.ball_of(self.cfg.radius)?;
        self.growth(&ball)?;
        let ends = self.ends_tables()?;
        let mut rows = Vec::new();
        let mut pts = Vec::new();
        for &d in &self.cfg.scales.clone() {
            let bound = self.cfg.bound.unwrap_or(4 * d);
            let e = asdim_at_scale(&ball, &self.model, d, bound, self.cfg.exact_limit)?;
            rows.push(vec![
                d.to_string(),
                bound.to_string(),
                e.n.to_string(),
                e.exact.to_string(),
                e.realized_diameter.to_string(),
            ]);
            pts.push((d, e.n as u64));
        }
        self.art.csv("asdim.csv", &["d", "D", "n", "exact", "realized_diameter"], &rows)?;
        self.art.plot(
            "asdim.svg",
            &LinePlot {
                title: "dimension estimate vs scale".into(),
                x_label: "d".into(),
                y_label: "n".into(),
                points: curve(pts.iter().copied()),
            },
        )?;
        let mut md = format!(
            "# {}\n\nBall of radius {}: {} vertices (growth.csv).\n\nEnds: {ends} (ends.csv).\n\n\
             Dimension upper estimates from net covers (asdim.csv):\n\n| d | n |\n|---|---|\n",
            self.model.descriptor(),
            self.cfg.radius,
            ball.len()
        );
        for (d, n) in &pts {
            let _ = writeln!(md, "| {d} | {n} |");
        }
        md.push_str("\nEstimates are finite-scale upper bounds, not proofs.\n");
        self.art.text("report.md", &md)?;
        Ok((format!("report for {}: {ends}", self.model.descriptor()), 0))
    }
}

fn json_kind(w: &RefutationWitness) -> String {
    serde_json::to_value(w.kind)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_else(|| format!("{:?}", w.kind))
}
