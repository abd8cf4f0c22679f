//! Mission graphs of line and arc segments, active-target extraction and
//! built-in test courses.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use core::fmt;

use crate::dynamics::{from_relative, to_relative, RelPoint, WorldPoint};
use crate::math;
use crate::types::{normalize_angle, Params, RelWaypoint, WorldPose};

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: String,
    pub x: f64,
    pub y: f64,
    pub vl: f64,
    pub vh: f64,
}

impl Node {
    pub fn new(id: impl Into<String>, x: f64, y: f64, vl: f64, vh: f64) -> Self {
        Self { id: id.into(), x, y, vl, vh }
    }

    pub fn position(&self) -> WorldPoint {
        WorldPoint::new(self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EdgeKind {
    Line,
    /// Signed curvature; positive turns left.
    Arc(f64),
}

/// Edge with endpoints given by node id, as written in a plan document.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeSpec {
    pub from: String,
    pub to: String,
    pub kind: EdgeKind,
}

impl EdgeSpec {
    pub fn new(from: impl Into<String>, to: impl Into<String>, kind: EdgeKind) -> Self {
        Self { from: from.into(), to: to.into(), kind }
    }
}

/// Edge with resolved node indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub kind: EdgeKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PlanError {
    Empty,
    InvalidId(String),
    DuplicateNode(String),
    NonFinite { node: usize },
    SpeedInterval { node: usize, vl: f64, vh: f64 },
    UnknownNode { id: String, edge: Option<usize> },
    ZeroCurvature { edge: usize },
    DegenerateEdge { edge: usize },
    NotCoCircular { edge: usize, chord: f64, diameter: f64 },
    MissingStart,
}

impl fmt::Display for PlanError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlanError::Empty => f.write_str("plan has no nodes"),
            PlanError::InvalidId(id) => write!(f, "invalid node id {id:?}"),
            PlanError::DuplicateNode(id) => write!(f, "duplicate node id {id:?}"),
            PlanError::NonFinite { node } => write!(f, "node {node} has a non-finite field"),
            PlanError::SpeedInterval { node, vl, vh } => {
                write!(f, "node {node}: speed interval [{vl}, {vh}] must satisfy 0 <= vl < vh")
            }
            PlanError::UnknownNode { id, .. } => write!(f, "unknown node {id:?}"),
            PlanError::ZeroCurvature { edge } => write!(f, "edge {edge}: arc curvature must be non-zero"),
            PlanError::DegenerateEdge { edge } => write!(f, "edge {edge}: endpoints coincide"),
            PlanError::NotCoCircular { edge, chord, diameter } => {
                write!(f, "edge {edge}: chord {chord} exceeds arc diameter {diameter}")
            }
            PlanError::MissingStart => f.write_str("plan has no start node"),
        }
    }
}

impl core::error::Error for PlanError {}

/// Validated, immutable mission graph.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanGraph {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    start: usize,
    terminals: Vec<usize>,
    out: Vec<Vec<usize>>,
}

const CO_CIRCULAR_TOL: f64 = 1e-6;

fn valid_id(id: &str) -> bool {
    !id.is_empty() && !id.chars().any(|c| c.is_whitespace() || c == '#')
}

impl PlanGraph {
    pub fn new(nodes: Vec<Node>, edges: &[EdgeSpec], start: &str, terminals: &[String]) -> Result<Self, PlanError> {
        if nodes.is_empty() {
            return Err(PlanError::Empty);
        }
        for (i, n) in nodes.iter().enumerate() {
            if !valid_id(&n.id) {
                return Err(PlanError::InvalidId(n.id.clone()));
            }
            if nodes[..i].iter().any(|m| m.id == n.id) {
                return Err(PlanError::DuplicateNode(n.id.clone()));
            }
            if ![n.x, n.y, n.vl, n.vh].iter().all(|v| v.is_finite()) {
                return Err(PlanError::NonFinite { node: i });
            }
            if !(n.vl >= 0.0 && n.vh > n.vl) {
                return Err(PlanError::SpeedInterval { node: i, vl: n.vl, vh: n.vh });
            }
        }
        let lookup = |id: &str, edge: Option<usize>| {
            nodes.iter().position(|n| n.id == id).ok_or_else(|| PlanError::UnknownNode { id: String::from(id), edge })
        };
        let mut resolved = Vec::with_capacity(edges.len());
        for (i, e) in edges.iter().enumerate() {
            let from = lookup(&e.from, Some(i))?;
            let to = lookup(&e.to, Some(i))?;
            let chord = nodes[from].position().distance(&nodes[to].position());
            if chord == 0.0 {
                return Err(PlanError::DegenerateEdge { edge: i });
            }
            if let EdgeKind::Arc(k) = e.kind {
                if k == 0.0 || !k.is_finite() {
                    return Err(PlanError::ZeroCurvature { edge: i });
                }
                let radius = 1.0 / k.abs();
                if chord > 2.0 * radius * (1.0 + CO_CIRCULAR_TOL) {
                    return Err(PlanError::NotCoCircular { edge: i, chord, diameter: 2.0 * radius });
                }
            }
            resolved.push(Edge { from, to, kind: e.kind });
        }
        let start = lookup(start, None).map_err(|_| PlanError::MissingStart)?;
        let terminals = terminals.iter().map(|t| lookup(t, None)).collect::<Result<Vec<_>, _>>()?;
        let mut out = vec![Vec::new(); nodes.len()];
        for (i, e) in resolved.iter().enumerate() {
            out[e.from].push(i);
        }
        Ok(Self { nodes, edges: resolved, start, terminals, out })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn terminals(&self) -> &[usize] {
        &self.terminals
    }

    pub fn is_terminal(&self, node: usize) -> bool {
        self.terminals.contains(&node)
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }

    /// Outgoing edge indices of `node`, in document order.
    pub fn successors(&self, node: usize) -> &[usize] {
        &self.out[node]
    }

    pub fn edge_specs(&self) -> Vec<EdgeSpec> {
        self.edges
            .iter()
            .map(|e| EdgeSpec::new(self.nodes[e.from].id.clone(), self.nodes[e.to].id.clone(), e.kind))
            .collect()
    }

    pub fn segment(&self, edge: usize) -> Segment {
        let e = &self.edges[edge];
        Segment::new(self.nodes[e.from].position(), self.nodes[e.to].position(), e.kind)
    }

    pub fn edge_end(&self, edge: usize) -> WorldPoint {
        self.nodes[self.edges[edge].to].position()
    }

    /// Speed limits in force on `edge`: those of its end node.
    pub fn edge_limits(&self, edge: usize) -> (f64, f64) {
        let n = &self.nodes[self.edges[edge].to];
        (n.vl, n.vh)
    }

    pub fn start_edge(&self, policy: &mut dyn BranchPolicy) -> Option<usize> {
        let succ = self.successors(self.start);
        (!succ.is_empty()).then(|| succ[policy.choose(self.start, succ).min(succ.len() - 1)])
    }

    /// Pose at the start node facing along the first edge.
    pub fn start_pose(&self, first_edge: usize) -> WorldPose {
        let n = &self.nodes[self.start];
        WorldPose::new(n.x, n.y, self.segment(first_edge).start_heading())
    }

    pub fn max_abs_curvature(&self) -> f64 {
        self.edges
            .iter()
            .map(|e| match e.kind {
                EdgeKind::Line => 0.0,
                EdgeKind::Arc(k) => k.abs(),
            })
            .fold(0.0, f64::max)
    }

    /// Sum of signed turning over all edges, radians.
    pub fn total_turning(&self) -> f64 {
        (0..self.edges.len()).map(|i| self.segment(i).turning()).sum()
    }
}

/// Geometry of one edge. Arcs always take the minor arc between endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Segment {
    Line { from: WorldPoint, to: WorldPoint },
    Arc(ArcGeometry),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcGeometry {
    pub from: WorldPoint,
    pub to: WorldPoint,
    pub center: WorldPoint,
    pub radius: f64,
    pub curvature: f64,
    pub start_angle: f64,
    /// Signed sweep, positive counterclockwise; `|sweep| ≤ π`.
    pub sweep: f64,
}

impl ArcGeometry {
    fn new(from: WorldPoint, to: WorldPoint, curvature: f64) -> Self {
        let radius = 1.0 / curvature.abs();
        let (dx, dy) = (to.x - from.x, to.y - from.y);
        let chord = math::hypot(dx, dy);
        let half = (0.5 * chord).min(radius);
        let h = math::sqrt((radius - half) * (radius + half));
        let side = curvature.signum();
        let (nx, ny) = (-dy / chord, dx / chord);
        let center = WorldPoint::new(0.5 * (from.x + to.x) + side * h * nx, 0.5 * (from.y + to.y) + side * h * ny);
        let sweep = side * 2.0 * math::asin(half / radius);
        let start_angle = math::atan2(from.y - center.y, from.x - center.x);
        Self { from, to, center, radius, curvature, start_angle, sweep }
    }

    pub fn point_at_angle(&self, angle: f64) -> WorldPoint {
        WorldPoint::new(self.center.x + self.radius * math::cos(angle), self.center.y + self.radius * math::sin(angle))
    }

    /// Unsigned angle already covered when the robot at `p` is projected
    /// onto the arc, clamped to `[0, |sweep|]`.
    pub fn progress(&self, p: WorldPoint) -> f64 {
        let phi = math::atan2(p.y - self.center.y, p.x - self.center.x);
        let along = self.sweep.signum() * normalize_angle(phi - self.start_angle);
        along.clamp(0.0, self.sweep.abs())
    }

    pub fn remaining(&self, p: WorldPoint) -> f64 {
        self.sweep.abs() - self.progress(p)
    }

    /// Point `ahead` radians past the projection of `p`, capped at the end.
    pub fn point_ahead(&self, p: WorldPoint, ahead: f64) -> WorldPoint {
        let prog = self.progress(p);
        let remaining = self.sweep.abs() - prog;
        if ahead >= remaining {
            return self.to;
        }
        self.point_at_angle(self.start_angle + self.sweep.signum() * (prog + ahead))
    }
}

impl Segment {
    pub fn new(from: WorldPoint, to: WorldPoint, kind: EdgeKind) -> Self {
        match kind {
            EdgeKind::Line => Segment::Line { from, to },
            EdgeKind::Arc(k) => Segment::Arc(ArcGeometry::new(from, to, k)),
        }
    }

    pub fn curvature(&self) -> f64 {
        match self {
            Segment::Line { .. } => 0.0,
            Segment::Arc(a) => a.curvature,
        }
    }

    pub fn turning(&self) -> f64 {
        match self {
            Segment::Line { .. } => 0.0,
            Segment::Arc(a) => a.sweep,
        }
    }

    pub fn length(&self) -> f64 {
        match self {
            Segment::Line { from, to } => from.distance(to),
            Segment::Arc(a) => a.radius * a.sweep.abs(),
        }
    }

    pub fn start_heading(&self) -> f64 {
        match self {
            Segment::Line { from, to } => math::atan2(to.y - from.y, to.x - from.x),
            Segment::Arc(a) => {
                let chord = math::atan2(a.to.y - a.from.y, a.to.x - a.from.x);
                normalize_angle(chord - 0.5 * a.sweep)
            }
        }
    }

    pub fn end_heading(&self) -> f64 {
        normalize_angle(self.start_heading() + self.turning())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InsideGoal;

impl fmt::Display for InsideGoal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("point lies inside the goal region")
    }
}

impl core::error::Error for InsideGoal {}

/// Curvature of the arc from the origin (heading +x) through `rel`, measured
/// against the goal-region-shifted radius so the band residual vanishes.
pub fn curvature_through(rel: RelPoint, eps: f64) -> Result<f64, InsideGoal> {
    let d = rel.x * rel.x + rel.y * rel.y - eps * eps;
    if d <= 0.0 {
        return Err(InsideGoal);
    }
    Ok(2.0 * rel.y / d)
}

/// The curvature a controller declares to the monitor: the exact arc through
/// the target when admissible, otherwise the segment's own curvature.
pub fn declared_curvature(rel: RelPoint, k_seg: f64, eps: f64) -> f64 {
    match curvature_through(rel, eps) {
        Ok(k) if k.abs() * eps <= 1.0 => k,
        _ => k_seg,
    }
}

/// Chooses among outgoing edges at a branching node.
pub trait BranchPolicy {
    /// Returns an index into `successors`, which is never empty.
    fn choose(&mut self, node: usize, successors: &[usize]) -> usize;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct FirstBranch;

impl BranchPolicy for FirstBranch {
    fn choose(&mut self, _node: usize, _successors: &[usize]) -> usize {
        0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetKind {
    /// The end node of the segment.
    Endpoint,
    /// An intermediate point on an arc, at most 90° ahead.
    Lookahead,
    /// Inserted because the natural target was not ahead of the robot.
    Synthetic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActiveTarget {
    pub edge: usize,
    pub waypoint: RelWaypoint,
    pub world: WorldPoint,
    pub kind: TargetKind,
    /// Curvature of the segment being followed.
    pub k_seg: f64,
    /// Whether this call moved on to a new edge.
    pub advanced: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpisodeEnd {
    Completed,
    Stuck,
}

/// Distance of the generic synthetic target, in multiples of ε.
const SYNTHETIC_RANGE: f64 = 3.0;

/// Recomputes the active target for `pose` while following `edge`.
///
/// Advances through the graph while the current end node lies within ε,
/// reporting [`EpisodeEnd::Completed`] at a terminal node and
/// [`EpisodeEnd::Stuck`] at any other dead end.
pub fn next_target(
    graph: &PlanGraph,
    edge: usize,
    pose: &WorldPose,
    p: &Params,
    policy: &mut dyn BranchPolicy,
) -> Result<ActiveTarget, EpisodeEnd> {
    let eps = p.eps();
    let mut edge = edge;
    let mut advanced = false;
    for _ in 0..=graph.edges().len() {
        let rel = to_relative(pose, graph.edge_end(edge));
        if rel.norm() > eps {
            return Ok(target_on_edge(graph, edge, pose, eps, advanced));
        }
        let node = graph.edges()[edge].to;
        if graph.is_terminal(node) {
            return Err(EpisodeEnd::Completed);
        }
        let succ = graph.successors(node);
        if succ.is_empty() {
            return Err(EpisodeEnd::Stuck);
        }
        edge = succ[policy.choose(node, succ).min(succ.len() - 1)];
        advanced = true;
    }
    // Every edge of a cycle ends within ε of the robot.
    Err(EpisodeEnd::Stuck)
}

fn target_on_edge(graph: &PlanGraph, edge: usize, pose: &WorldPose, eps: f64, advanced: bool) -> ActiveTarget {
    let seg = graph.segment(edge);
    let k_seg = seg.curvature();
    let (vl, vh) = graph.edge_limits(edge);
    let here = WorldPoint::new(pose.x, pose.y);

    let (mut world, mut kind) = match &seg {
        Segment::Arc(arc) if arc.remaining(here) > FRAC_PI_2 => {
            (arc.point_ahead(here, FRAC_PI_2), TargetKind::Lookahead)
        }
        _ => (graph.edge_end(edge), TargetKind::Endpoint),
    };
    let mut rel = to_relative(pose, world);

    if rel.x <= 0.0 {
        if let Segment::Arc(arc) = &seg {
            let w = arc.point_ahead(here, FRAC_PI_4);
            let r = to_relative(pose, w);
            if r.x > 0.0 {
                (world, rel, kind) = (w, r, TargetKind::Synthetic);
            }
        }
    }
    if rel.x <= 0.0 {
        let side = if rel.y >= 0.0 { 1.0 } else { -1.0 };
        let d = SYNTHETIC_RANGE * eps;
        rel = RelPoint::new(d * math::cos(FRAC_PI_4), side * d * math::sin(FRAC_PI_4));
        world = from_relative(pose, rel);
        kind = TargetKind::Synthetic;
    }

    let k = declared_curvature(rel, k_seg, eps);
    ActiveTarget { edge, waypoint: RelWaypoint::new(rel.x, rel.y, k, vl, vh), world, kind, k_seg, advanced }
}

/// Splits every arc sweeping more than `max_sweep` radians into equal parts.
/// Inserted nodes carry the limits of the split edge's end node.
pub fn subdivide(graph: &PlanGraph, max_sweep: f64) -> PlanGraph {
    let mut nodes = graph.nodes().to_vec();
    let mut edges = Vec::new();
    for (i, e) in graph.edges().iter().enumerate() {
        let (from, to) = (&graph.nodes()[e.from], &graph.nodes()[e.to]);
        let Segment::Arc(arc) = graph.segment(i) else {
            edges.push(EdgeSpec::new(from.id.clone(), to.id.clone(), e.kind));
            continue;
        };
        let parts = if max_sweep > 0.0 { libm::ceil(arc.sweep.abs() / max_sweep).max(1.0) as usize } else { 1 };
        let mut prev = from.id.clone();
        for j in 1..parts {
            let p = arc.point_at_angle(arc.start_angle + arc.sweep * (j as f64 / parts as f64));
            let mut id = format!("{}.{}.{}", from.id, to.id, j);
            while nodes.iter().any(|n| n.id == id) {
                id.push('\'');
            }
            nodes.push(Node::new(id.clone(), p.x, p.y, to.vl, to.vh));
            edges.push(EdgeSpec::new(prev, id.clone(), e.kind));
            prev = id;
        }
        edges.push(EdgeSpec::new(prev, to.id.clone(), e.kind));
    }
    let terminals: Vec<String> = graph.terminals().iter().map(|&t| graph.nodes()[t].id.clone()).collect();
    PlanGraph::new(nodes, &edges, &graph.nodes()[graph.start()].id, &terminals)
        .expect("subdividing a valid graph keeps it valid")
}

/// Built-in closed courses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Environment {
    Rect,
    Turns,
    Clover,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedProfile {
    pub vl: f64,
    pub vh: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnvError {
    NonPositiveScale(f64),
    BadProfile { vl: f64, vh: f64 },
}

impl fmt::Display for EnvError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnvError::NonPositiveScale(s) => write!(f, "scale must be positive, got {s}"),
            EnvError::BadProfile { vl, vh } => write!(f, "speed profile [{vl}, {vh}] must satisfy 0 <= vl < vh"),
        }
    }
}

impl core::error::Error for EnvError {}

impl Environment {
    pub const ALL: [Environment; 3] = [Environment::Rect, Environment::Turns, Environment::Clover];

    pub fn name(self) -> &'static str {
        match self {
            Environment::Rect => "rect",
            Environment::Turns => "turns",
            Environment::Clover => "clover",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.name() == name)
    }

    pub fn default_scale(self) -> f64 {
        match self {
            Environment::Rect => 40.0,
            Environment::Turns => 20.0,
            Environment::Clover => 200.0,
        }
    }

    pub fn default_profile(self) -> SpeedProfile {
        match self {
            Environment::Rect => SpeedProfile { vl: 3.0, vh: 9.0 },
            Environment::Turns => SpeedProfile { vl: 1.5, vh: 5.0 },
            Environment::Clover => SpeedProfile { vl: 12.0, vh: 36.0 },
        }
    }
}

/// Builds a course by driving a virtual robot through lines and arcs.
struct Turtle {
    x: f64,
    y: f64,
    heading: f64,
    profile: SpeedProfile,
    nodes: Vec<Node>,
    edges: Vec<EdgeSpec>,
}

impl Turtle {
    fn new(profile: SpeedProfile, heading: f64) -> Self {
        let nodes = vec![Node::new("n0", 0.0, 0.0, profile.vl, profile.vh)];
        Self { x: 0.0, y: 0.0, heading, profile, nodes, edges: Vec::new() }
    }

    fn push(&mut self, kind: EdgeKind) {
        let from = self.nodes.last().map(|n| n.id.clone()).unwrap_or_default();
        let id = format!("n{}", self.nodes.len());
        self.nodes.push(Node::new(id.clone(), self.x, self.y, self.profile.vl, self.profile.vh));
        self.edges.push(EdgeSpec::new(from, id, kind));
    }

    fn line(&mut self, len: f64) {
        self.x += len * math::cos(self.heading);
        self.y += len * math::sin(self.heading);
        self.push(EdgeKind::Line);
    }

    /// Turns through `angle` radians (sign gives direction) on radius `r`.
    fn arc(&mut self, r: f64, angle: f64) {
        let k = angle.signum() / r;
        let end = self.heading + angle;
        self.x += (math::sin(end) - math::sin(self.heading)) / k;
        self.y -= (math::cos(end) - math::cos(self.heading)) / k;
        self.heading = end;
        self.push(EdgeKind::Arc(k));
    }

    /// Redirects the last edge to the first node, closing the loop.
    fn close(mut self) -> PlanGraph {
        self.nodes.pop();
        if let Some(last) = self.edges.last_mut() {
            last.to = self.nodes[0].id.clone();
        }
        let start = self.nodes[0].id.clone();
        PlanGraph::new(self.nodes, &self.edges, &start, core::slice::from_ref(&start))
            .expect("generated course is valid")
    }
}

/// Generates a closed course; the start node is also the terminal.
///
/// * `rect`: rounded square of side `scale`, corner radius `scale/8`.
/// * `turns`: plus-shaped outline with arm length and width `0.3·scale` and
///   corner radius `0.1·scale`, alternating left and right turns.
/// * `clover`: four 270° lobes of radius `scale/4` joined by straights
///   through the center.
pub fn gen_environment(env: Environment, scale: f64, profile: Option<SpeedProfile>) -> Result<PlanGraph, EnvError> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(EnvError::NonPositiveScale(scale));
    }
    let profile = profile.unwrap_or(env.default_profile());
    if !(profile.vl >= 0.0 && profile.vh > profile.vl && profile.vh.is_finite()) {
        return Err(EnvError::BadProfile { vl: profile.vl, vh: profile.vh });
    }
    let graph = match env {
        Environment::Rect => {
            let r = scale / 8.0;
            let mut t = Turtle::new(profile, 0.0);
            for _ in 0..4 {
                t.line(scale - 2.0 * r);
                t.arc(r, FRAC_PI_2);
            }
            t.close()
        }
        Environment::Turns => {
            let (arm, width, r) = (0.3 * scale, 0.3 * scale, 0.1 * scale);
            let mut t = Turtle::new(profile, 0.0);
            for _ in 0..4 {
                t.line(arm - 2.0 * r);
                t.arc(r, FRAC_PI_2);
                t.line(width - 2.0 * r);
                t.arc(r, FRAC_PI_2);
                t.line(arm - 2.0 * r);
                t.arc(r, -FRAC_PI_2);
            }
            t.close()
        }
        Environment::Clover => clover(scale / 4.0, profile),
    };
    Ok(graph)
}

fn clover(r: f64, profile: SpeedProfile) -> PlanGraph {
    let mut t = Turtle::new(profile, 0.0);
    for lobe in 0..4 {
        t.line(r);
        for _ in 0..3 {
            t.arc(r, FRAC_PI_2);
        }
        t.line(r);
        if lobe < 3 {
            // re-anchor on the exact center to keep rounding from accumulating
            if let Some(n) = t.nodes.last_mut() {
                n.x = 0.0;
                n.y = 0.0;
            }
            t.x = 0.0;
            t.y = 0.0;
        }
    }
    t.close()
}
