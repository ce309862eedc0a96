//! JSON instance and allocation files (`format_version: 1`).
//!
//! Items and agents are referred to by id. Valuation parameters by kind:
//!
//! | kind | params |
//! |---|---|
//! | `additive` | `{"values": {item: v}}` |
//! | `budget_additive` | `{"values": {item: v}, "cap": c}` |
//! | `coverage` | `{"covers": {item: [ground]}, "weights": {ground: w}}` |
//! | `partition_matroid_rank` | `{"classes": [{"items": [item], "capacity": k}], "scale": s}` |
//! | `explicit_table` | `{"values": [v(mask) for mask in 0..2^m]}` |
//!
//! Items missing from a `values` or `covers` map are worth nothing; items in
//! no class of a partition matroid never add rank.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::instance::{Allocation, Instance, Weight};
use crate::itemset::ItemSet;
use crate::scalar::Scalar;
use crate::valuation::Valuation;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    format_version: u32,
    agents: Vec<AgentEntry>,
    items: Vec<String>,
    valuations: Vec<ValuationEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AgentEntry {
    id: String,
    weight: [u64; 2],
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ValuationEntry {
    agent: String,
    kind: String,
    params: Value,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(bound = "T: Scalar")]
struct AdditiveParams<T> {
    values: BTreeMap<String, T>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(bound = "T: Scalar")]
struct BudgetParams<T> {
    values: BTreeMap<String, T>,
    cap: T,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(bound = "T: Scalar")]
struct CoverageParams<T> {
    covers: BTreeMap<String, Vec<String>>,
    weights: BTreeMap<String, T>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassEntry {
    items: Vec<String>,
    capacity: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(bound = "T: Scalar")]
struct MatroidParams<T> {
    classes: Vec<ClassEntry>,
    scale: T,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(bound = "T: Scalar")]
struct TableParams<T> {
    values: Vec<T>,
}

fn check_version(v: u32) -> Result<()> {
    if v == FORMAT_VERSION {
        Ok(())
    } else {
        Err(Error::Format(format!("unsupported format_version {v}")))
    }
}

fn params<P: serde::de::DeserializeOwned>(agent: &str, value: Value) -> Result<P> {
    serde_json::from_value(value).map_err(|e| Error::Format(format!("valuation of agent {agent}: {e}")))
}

struct ItemIndex<'a>(HashMap<&'a str, usize>);

impl<'a> ItemIndex<'a> {
    fn new(items: &'a [String]) -> Self {
        Self(items.iter().enumerate().map(|(j, s)| (s.as_str(), j)).collect())
    }

    fn get(&self, id: &str) -> Result<usize> {
        self.0.get(id).copied().ok_or_else(|| Error::Format(format!("unknown item id {id:?}")))
    }

    fn dense<T: Scalar>(&self, m: usize, values: BTreeMap<String, T>) -> Result<Vec<T>> {
        let mut out = vec![T::zero(); m];
        for (id, v) in values {
            out[self.get(&id)?] = v;
        }
        Ok(out)
    }
}

fn parse_valuation<T: Scalar>(items: &ItemIndex<'_>, m: usize, entry: ValuationEntry) -> Result<Valuation<T>> {
    let agent = entry.agent.as_str();
    match entry.kind.as_str() {
        "additive" => {
            let p: AdditiveParams<T> = params(agent, entry.params)?;
            Valuation::additive(items.dense(m, p.values)?)
        }
        "budget_additive" => {
            let p: BudgetParams<T> = params(agent, entry.params)?;
            Valuation::budget_additive(items.dense(m, p.values)?, p.cap)
        }
        "coverage" => {
            let p: CoverageParams<T> = params(agent, entry.params)?;
            let ground: HashMap<&str, usize> = p.weights.keys().enumerate().map(|(u, id)| (id.as_str(), u)).collect();
            let mut covers = vec![Vec::new(); m];
            for (item, elems) in &p.covers {
                let j = items.get(item)?;
                for e in elems {
                    let u = ground
                        .get(e.as_str())
                        .ok_or_else(|| Error::Format(format!("agent {agent}: unknown ground element {e:?}")))?;
                    covers[j].push(*u);
                }
                covers[j].sort_unstable();
                covers[j].dedup();
            }
            Valuation::coverage(covers, p.weights.into_values().collect())
        }
        "partition_matroid_rank" => {
            let p: MatroidParams<T> = params(agent, entry.params)?;
            let spare = p.classes.len();
            let mut class_of = vec![spare; m];
            let mut capacities: Vec<usize> = p.classes.iter().map(|c| c.capacity).collect();
            capacities.push(0);
            for (c, class) in p.classes.iter().enumerate() {
                for id in &class.items {
                    let j = items.get(id)?;
                    if class_of[j] != spare {
                        return Err(Error::Format(format!("agent {agent}: item {id:?} is in two classes")));
                    }
                    class_of[j] = c;
                }
            }
            if !class_of.contains(&spare) {
                capacities.pop();
            }
            Valuation::partition_matroid_rank(class_of, capacities, p.scale)
        }
        "explicit_table" => {
            let p: TableParams<T> = params(agent, entry.params)?;
            Valuation::explicit_table(m, p.values)
        }
        other => Err(Error::Format(format!("unknown valuation kind {other:?}"))),
    }
}

/// Parses an instance document. Structural checks beyond the file format
/// are left to [`Instance::validate`].
pub fn instance_from_json<T: Scalar>(text: &str) -> Result<Instance<T>> {
    let file: InstanceFile = serde_json::from_str(text)?;
    check_version(file.format_version)?;
    let m = file.items.len();
    let items = ItemIndex::new(&file.items);
    let mut weights = Vec::with_capacity(file.agents.len());
    for a in &file.agents {
        let [num, den] = a.weight;
        if den == 0 {
            return Err(Error::Format(format!("agent {:?} has a zero denominator", a.id)));
        }
        weights.push(Weight::new(num, den));
    }
    let agent_pos: HashMap<&str, usize> = file.agents.iter().enumerate().map(|(i, a)| (a.id.as_str(), i)).collect();
    let mut slots: Vec<Option<Valuation<T>>> = vec![None; file.agents.len()];
    for entry in file.valuations {
        let i = *agent_pos
            .get(entry.agent.as_str())
            .ok_or_else(|| Error::Format(format!("valuation for unknown agent {:?}", entry.agent)))?;
        if slots[i].is_some() {
            return Err(Error::Format(format!("agent {:?} has two valuations", entry.agent)));
        }
        slots[i] = Some(parse_valuation(&items, m, entry)?);
    }
    let mut valuations = Vec::with_capacity(slots.len());
    for (i, slot) in slots.into_iter().enumerate() {
        valuations.push(slot.ok_or_else(|| Error::Format(format!("agent {:?} has no valuation", file.agents[i].id)))?);
    }
    let agent_ids = file.agents.into_iter().map(|a| a.id).collect();
    Ok(Instance::new(agent_ids, weights, file.items, valuations))
}

fn to_value<S: Serialize>(s: S) -> Value {
    serde_json::to_value(s).expect("parameter structs serialize")
}

fn valuation_params<T: Scalar>(inst: &Instance<T>, v: &Valuation<T>) -> Value {
    let ids = inst.item_ids();
    let named = |values: &[T]| -> BTreeMap<String, T> {
        values.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(j, &x)| (ids[j].clone(), x)).collect()
    };
    match v {
        Valuation::Additive { values } => to_value(AdditiveParams { values: named(values) }),
        Valuation::BudgetAdditive { values, cap } => to_value(BudgetParams { values: named(values), cap: *cap }),
        Valuation::Coverage { covers, ground_weights } => {
            // Zero-padded so the sorted map keeps element order.
            let width = ground_weights.len().to_string().len();
            let gid = |u: usize| format!("u{:0width$}", u + 1);
            let covers = covers
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_empty())
                .map(|(j, c)| (ids[j].clone(), c.iter().map(|&u| gid(u)).collect()))
                .collect();
            let weights = ground_weights.iter().enumerate().map(|(u, &w)| (gid(u), w)).collect();
            to_value(CoverageParams { covers, weights })
        }
        Valuation::PartitionMatroidRank { class_of, capacities, scale } => {
            let classes = capacities
                .iter()
                .enumerate()
                .map(|(c, &capacity)| ClassEntry {
                    items: (0..class_of.len()).filter(|&j| class_of[j] == c).map(|j| ids[j].clone()).collect(),
                    capacity,
                })
                .collect();
            to_value(MatroidParams { classes, scale: *scale })
        }
        Valuation::ExplicitTable { table, .. } => to_value(TableParams { values: table.clone() }),
    }
}

/// Pretty-printed instance document; deterministic for a given instance.
pub fn instance_to_json<T: Scalar>(inst: &Instance<T>) -> String {
    let file = InstanceFile {
        format_version: FORMAT_VERSION,
        agents: inst
            .agent_ids()
            .iter()
            .zip(inst.weights())
            .map(|(id, w)| AgentEntry { id: id.clone(), weight: [*w.numer(), *w.denom()] })
            .collect(),
        items: inst.item_ids().to_vec(),
        valuations: inst
            .agent_ids()
            .iter()
            .zip(inst.valuations())
            .map(|(id, v)| ValuationEntry {
                agent: id.clone(),
                kind: v.kind().name().to_string(),
                params: valuation_params(inst, v),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("instance serializes")
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AllocationFile {
    format_version: u32,
    bundles: BTreeMap<String, Vec<String>>,
}

/// `agent id → item ids`, listing every agent.
pub fn named_bundles<T: Scalar>(inst: &Instance<T>, alloc: &Allocation) -> BTreeMap<String, Vec<String>> {
    inst.agent_ids()
        .iter()
        .zip(alloc.bundles())
        .map(|(a, b)| (a.clone(), b.iter().map(|j| inst.item_ids()[j].clone()).collect()))
        .collect()
}

pub fn allocation_to_json<T: Scalar>(inst: &Instance<T>, alloc: &Allocation) -> String {
    let file = AllocationFile { format_version: FORMAT_VERSION, bundles: named_bundles(inst, alloc) };
    serde_json::to_string_pretty(&file).expect("allocation serializes")
}

/// Agents absent from the file receive nothing.
pub fn allocation_from_json<T: Scalar>(inst: &Instance<T>, text: &str) -> Result<Allocation> {
    let file: AllocationFile = serde_json::from_str(text)?;
    check_version(file.format_version)?;
    let items = ItemIndex::new(inst.item_ids());
    let mut bundles = vec![ItemSet::new(); inst.num_agents()];
    for (agent, ids) in file.bundles {
        let i = inst
            .agent_ids()
            .iter()
            .position(|a| *a == agent)
            .ok_or_else(|| Error::Format(format!("unknown agent id {agent:?}")))?;
        for id in ids {
            bundles[i].insert(items.get(&id)?);
        }
    }
    Allocation::new(bundles)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{random_instance, Family, WeightMode};

    const E1: &str = r#"{
        "format_version": 1,
        "agents": [{"id": "1", "weight": [1, 2]}, {"id": "2", "weight": [1, 2]}],
        "items": ["a", "b", "c", "d"],
        "valuations": [
            {"agent": "1", "kind": "additive", "params": {"values": {"a": 4, "b": 1, "c": 1, "d": 1}}},
            {"agent": "2", "kind": "additive", "params": {"values": {"a": 1, "b": 3, "c": 1, "d": 1}}}
        ]
    }"#;

    #[test]
    fn parses_e1() {
        let inst: Instance<f64> = instance_from_json(E1).unwrap();
        assert!(inst.validate().is_empty());
        assert_eq!(inst.valuation(1).value(&ItemSet::from([1, 2])), 4.0);
    }

    #[test]
    fn round_trips_every_family() {
        for family in Family::ALL {
            let inst: Instance<f64> = random_instance(family, 3, 6, WeightMode::Asymmetric, 9).unwrap();
            let text = instance_to_json(&inst);
            let back: Instance<f64> = instance_from_json(&text).unwrap();
            assert_eq!(back.weights(), inst.weights());
            for (a, b) in inst.valuations().iter().zip(back.valuations()) {
                for mask in 0u64..64 {
                    let s = ItemSet::from_mask(&[0, 1, 2, 3, 4, 5], mask);
                    assert_eq!(a.value(&s), b.value(&s), "{family}");
                }
            }
            assert_eq!(instance_to_json(&back), text);
        }
    }

    #[test]
    fn table_round_trip() {
        let v = Valuation::explicit_table(2, vec![0.0, 1.0, 2.0, 2.5]).unwrap();
        let inst = Instance::symmetric(vec![v.clone()], 2);
        let back: Instance<f64> = instance_from_json(&instance_to_json(&inst)).unwrap();
        assert_eq!(back.valuation(0), &v);
    }

    #[test]
    fn rejects_bad_documents() {
        assert!(instance_from_json::<f64>(&E1.replace("\"format_version\": 1", "\"format_version\": 2")).is_err());
        assert!(instance_from_json::<f64>(&E1.replace("\"d\": 1}}}", "\"z\": 1}}}")).is_err());
        assert!(instance_from_json::<f64>(&E1.replace("additive", "xos")).is_err());
        assert!(instance_from_json::<f64>("{").is_err());
    }

    #[test]
    fn allocation_round_trip() {
        let inst: Instance<f64> = instance_from_json(E1).unwrap();
        let alloc = Allocation::new(vec![ItemSet::from([0, 3]), ItemSet::from([1, 2])]).unwrap();
        let text = allocation_to_json(&inst, &alloc);
        assert!(text.contains("\"a\""));
        assert_eq!(allocation_from_json(&inst, &text).unwrap(), alloc);
        let overlapping = r#"{"format_version": 1, "bundles": {"1": ["a"], "2": ["a"]}}"#;
        assert!(allocation_from_json(&inst, overlapping).is_err());
    }
}
