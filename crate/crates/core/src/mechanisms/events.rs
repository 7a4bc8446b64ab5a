//! Event families used by the statistical auditor.
//!
//! Each output type picks a finite family of events from a pilot sample.
//! The auditor only ever inspects these events, so its estimate of the
//! divergence is a lower bound on the true supremum.

use std::collections::BTreeSet;
use std::fmt::Debug;
use std::sync::Arc;

use crate::divergence::{grid_intervals, quantile_grid};

/// Discrete outputs with at most this many observed values get every
/// subset as an event; larger supports fall back to singletons and their
/// complements.
pub const SUBSET_FAMILY_MAX_SUPPORT: usize = 10;

/// Quantile cells per real coordinate.
pub const REAL_GRID_CELLS: usize = 12;

/// A named measurable predicate.
#[derive(Clone)]
pub struct Event<T> {
    pub label: String,
    predicate: Arc<dyn Fn(&T) -> bool + Send + Sync>,
}

impl<T> Event<T> {
    pub fn new(label: impl Into<String>, predicate: impl Fn(&T) -> bool + Send + Sync + 'static) -> Self {
        Self {
            label: label.into(),
            predicate: Arc::new(predicate),
        }
    }

    pub fn contains(&self, x: &T) -> bool {
        (self.predicate)(x)
    }
}

impl<T> Debug for Event<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Event").field("label", &self.label).finish()
    }
}

/// Output types the statistical auditor knows how to build events for.
pub trait EventSpace: Sized + Clone + Send + Sync + 'static {
    fn event_family(pilot: &[Self]) -> Vec<Event<Self>>;
}

/// Subsets of the observed support (or singletons and complements when the
/// support is large).
pub fn discrete_events<T>(pilot: &[T]) -> Vec<Event<T>>
where
    T: Ord + Clone + Debug + Send + Sync + 'static,
{
    let support: Vec<T> = pilot.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    let mut out = Vec::new();
    if support.len() <= SUBSET_FAMILY_MAX_SUPPORT {
        for mask in 1u32..(1u32 << support.len()) {
            let members: BTreeSet<T> = support
                .iter()
                .enumerate()
                .filter(|(k, _)| mask & (1 << k) != 0)
                .map(|(_, v)| v.clone())
                .collect();
            let label = format!("{:?}", members);
            out.push(Event::new(label, move |x: &T| members.contains(x)));
        }
    } else {
        for v in support {
            let w = v.clone();
            out.push(Event::new(format!("{{{:?}}}", v), move |x: &T| *x == v));
            out.push(Event::new(format!("not {{{:?}}}", w), move |x: &T| *x != w));
        }
    }
    out
}

macro_rules! discrete_event_space {
    ($($t:ty),*) => {
        $(impl EventSpace for $t {
            fn event_family(pilot: &[Self]) -> Vec<Event<Self>> {
                discrete_events(pilot)
            }
        })*
    };
}

discrete_event_space!(usize, u8, u32, u64, i64, bool, String, Vec<u64>);

impl<A, B> EventSpace for (A, B)
where
    A: Ord + Clone + Debug + Send + Sync + 'static,
    B: Ord + Clone + Debug + Send + Sync + 'static,
{
    fn event_family(pilot: &[Self]) -> Vec<Event<Self>> {
        discrete_events(pilot)
    }
}

fn interval_label(lo: f64, hi: f64) -> String {
    format!("({lo}, {hi}]")
}

impl EventSpace for f64 {
    fn event_family(pilot: &[Self]) -> Vec<Event<Self>> {
        grid_intervals(&quantile_grid(pilot, REAL_GRID_CELLS))
            .into_iter()
            .map(|iv| Event::new(interval_label(iv.lo, iv.hi), move |x: &f64| iv.contains(*x)))
            .collect()
    }
}

/// Cylinder events: an interval on one coordinate, the rest unrestricted.
impl EventSpace for Vec<f64> {
    fn event_family(pilot: &[Self]) -> Vec<Event<Self>> {
        let dim = pilot.iter().map(Vec::len).max().unwrap_or(0);
        let mut out = Vec::new();
        for j in 0..dim {
            let column: Vec<f64> = pilot.iter().filter_map(|v| v.get(j).copied()).collect();
            for iv in grid_intervals(&quantile_grid(&column, REAL_GRID_CELLS)) {
                out.push(Event::new(
                    format!("x[{j}] in {}", interval_label(iv.lo, iv.hi)),
                    move |x: &Vec<f64>| x.get(j).is_some_and(|v| iv.contains(*v)),
                ));
            }
        }
        if dim == 0 {
            out.push(Event::new("everything", |_: &Vec<f64>| true));
        }
        out
    }
}
