//! Per-class and per-combination instruction frequencies across sources.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::classify::{ClassSet, CommandClass};

/// Frequencies for one source (typically one navigation app).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusStats {
    pub source_label: String,
    pub class_counts: BTreeMap<CommandClass, usize>,
    pub combo_counts: BTreeMap<ClassSet, usize>,
    pub total_events: usize,
}

impl CorpusStats {
    pub fn from_class_sets<'a, I>(source_label: impl Into<String>, sets: I) -> CorpusStats
    where
        I: IntoIterator<Item = &'a ClassSet>,
        I::IntoIter: Clone,
    {
        let sets = sets.into_iter();
        CorpusStats {
            source_label: source_label.into(),
            class_counts: class_frequencies(sets.clone()),
            combo_counts: combo_frequencies(sets.clone()),
            total_events: sets.count(),
        }
    }

    /// Folds another source's counts into this one.
    pub fn merge(&mut self, other: &CorpusStats) {
        for (c, n) in &other.class_counts {
            *self.class_counts.entry(*c).or_default() += n;
        }
        for (set, n) in &other.combo_counts {
            *self.combo_counts.entry(set.clone()).or_default() += n;
        }
        self.total_events += other.total_events;
    }
}

/// Number of instructions carrying each class; every class is present, unseen ones as 0.
pub fn class_frequencies<'a>(
    sets: impl IntoIterator<Item = &'a ClassSet>,
) -> BTreeMap<CommandClass, usize> {
    let mut counts: BTreeMap<CommandClass, usize> =
        CommandClass::ALL.iter().map(|&c| (c, 0)).collect();
    for set in sets {
        for c in set {
            *counts.entry(*c).or_default() += 1;
        }
    }
    counts
}

/// Number of instructions with exactly each class set.
pub fn combo_frequencies<'a>(
    sets: impl IntoIterator<Item = &'a ClassSet>,
) -> BTreeMap<ClassSet, usize> {
    let mut counts = BTreeMap::new();
    for set in sets {
        *counts.entry(set.clone()).or_default() += 1;
    }
    counts
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComboRow {
    pub classes: ClassSet,
    pub per_source: Vec<usize>,
    pub total: usize,
}

fn canonical_names(set: &ClassSet) -> Vec<&'static str> {
    // ClassSet iterates in name order already
    set.iter().map(|c| c.name()).collect()
}

/// One row per distinct class set, most frequent first; ties go to the
/// lexicographically smaller class-name list.
pub fn combo_rows(sources: &[CorpusStats]) -> Vec<ComboRow> {
    let mut keys: Vec<&ClassSet> = sources.iter().flat_map(|s| s.combo_counts.keys()).collect();
    keys.sort();
    keys.dedup();
    let mut rows: Vec<ComboRow> = keys
        .into_iter()
        .map(|set| {
            let per_source: Vec<usize> = sources
                .iter()
                .map(|s| s.combo_counts.get(set).copied().unwrap_or(0))
                .collect();
            ComboRow {
                classes: set.clone(),
                total: per_source.iter().sum(),
                per_source,
            }
        })
        .collect();
    rows.sort_by(|a, b| {
        b.total
            .cmp(&a.total)
            .then_with(|| canonical_names(&a.classes).cmp(&canonical_names(&b.classes)))
    });
    rows
}

fn combo_label(set: &ClassSet) -> String {
    if set.is_empty() {
        return "(none)".to_owned();
    }
    set.iter().map(|c| c.label()).collect::<Vec<_>>().join(", ")
}

fn table_row(out: &mut String, cells: &[String]) {
    let _ = writeln!(out, "| {} |", cells.join(" | "));
}

/// Pipe-delimited class and combination tables, sources as columns in input
/// order followed by a Total column.
pub fn render_report(sources: &[CorpusStats]) -> String {
    let mut header = vec!["Command Classification".to_owned()];
    header.extend(sources.iter().map(|s| s.source_label.clone()));
    header.push("Total".to_owned());
    let rule: Vec<String> = header.iter().map(|_| "---".to_owned()).collect();

    let mut out = String::new();
    out.push_str("Instruction references by class\n\n");
    table_row(&mut out, &header);
    table_row(&mut out, &rule);
    for class in CommandClass::REPORT_ORDER {
        let counts: Vec<usize> = sources
            .iter()
            .map(|s| s.class_counts.get(&class).copied().unwrap_or(0))
            .collect();
        let mut cells = vec![class.label().to_owned()];
        cells.extend(counts.iter().map(usize::to_string));
        cells.push(counts.iter().sum::<usize>().to_string());
        table_row(&mut out, &cells);
    }
    let totals: Vec<usize> = sources.iter().map(|s| s.total_events).collect();
    let mut cells = vec!["Instructions".to_owned()];
    cells.extend(totals.iter().map(usize::to_string));
    cells.push(totals.iter().sum::<usize>().to_string());
    table_row(&mut out, &cells);

    out.push_str("\nMulti-attribute combinations\n\n");
    table_row(&mut out, &header);
    table_row(&mut out, &rule);
    for row in combo_rows(sources) {
        let mut cells = vec![combo_label(&row.classes)];
        cells.extend(row.per_source.iter().map(usize::to_string));
        cells.push(row.total.to_string());
        table_row(&mut out, &cells);
    }
    out
}
