//! Schema routing, formulation and repair for the grammar backend.

use crate::directory::{EntityId, EntityKind, EntityRole};
use crate::request::{check_consistency, FilterClause, QueryPlan, SearchRequest};
use crate::schema::{validate_filter, SchemaName, SchemaRegistry};

use super::lexicon::Lexicon;
use super::{Decomposition, EntityMention, LmError};

/// The clauses implied by the actions that target one schema.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionGroup {
    pub schema: SchemaName,
    pub clauses: Vec<FilterClause>,
}

fn merge(into: &mut Vec<FilterClause>, clause: FilterClause) -> Result<(), String> {
    if into.contains(&clause) {
        return Ok(());
    }
    if let FilterClause::Term { field, value } = &clause {
        for c in into.iter() {
            if let FilterClause::Term { field: f, value: v } = c {
                if f == field {
                    return Err(format!("conflicting values for field '{field}': {v} and {value}"));
                }
            }
        }
    }
    into.push(clause);
    Ok(())
}

/// Groups actions by schema in order of first appearance. Generic actions
/// fold into the first specific group whose schema has all their fields.
pub fn action_groups(
    lexicon: &Lexicon,
    registry: &SchemaRegistry,
    actions: &[String],
) -> Result<Vec<ActionGroup>, LmError> {
    let mut groups: Vec<ActionGroup> = Vec::new();
    let mut generic = Vec::new();
    for name in actions {
        let entry = lexicon
            .action(name)
            .ok_or_else(|| LmError::Formulation(format!("unknown action '{name}'")))?;
        if entry.generic {
            generic.push(entry);
            continue;
        }
        let idx = match groups.iter().position(|g| g.schema == entry.schema) {
            Some(i) => i,
            None => {
                groups.push(ActionGroup {
                    schema: entry.schema,
                    clauses: Vec::new(),
                });
                groups.len() - 1
            }
        };
        for c in &entry.assigns {
            merge(&mut groups[idx].clauses, c.clone()).map_err(LmError::Formulation)?;
        }
    }
    for entry in generic {
        let fits = |s: SchemaName| {
            registry
                .get(s)
                .is_some_and(|schema| entry.assigns.iter().all(|c| schema.has_field(c.field())))
        };
        let idx = match groups.iter().position(|g| g.schema == entry.schema || fits(g.schema)) {
            Some(i) => i,
            None => {
                groups.push(ActionGroup {
                    schema: entry.schema,
                    clauses: Vec::new(),
                });
                groups.len() - 1
            }
        };
        for c in &entry.assigns {
            merge(&mut groups[idx].clauses, c.clone()).map_err(LmError::Formulation)?;
        }
    }
    if groups.is_empty() {
        return Err(LmError::Formulation("the query names no action".into()));
    }
    Ok(groups)
}

fn entity_fields(e: &EntityMention) -> &'static [&'static str] {
    match (e.kind, e.role) {
        (EntityKind::Player, _) => &["nflId"],
        (EntityKind::Team, EntityRole::Actor) => &["teamId"],
        (EntityKind::Team, EntityRole::Opponent) => &["opponentTeamId"],
    }
}

/// Each requirement is satisfied by any one of its field keys.
fn requirements(lexicon: &Lexicon, d: &Decomposition) -> Result<Vec<Vec<String>>, LmError> {
    let mut needs = Vec::new();
    for e in &d.entities {
        needs.push(entity_fields(e).iter().map(|s| s.to_string()).collect());
    }
    for label in &d.conditions {
        let (entry, _) = lexicon
            .condition_for_label(label)
            .ok_or_else(|| LmError::Routing(format!("condition '{label}' is not in the lexicon")))?;
        needs.push(entry.fields().map(str::to_string).collect());
    }
    Ok(needs)
}

/// The smallest schema set that contains every action's schema and has a
/// field for every entity and condition. Action schemas come first, in
/// order of appearance; ties between equally small sets go to the one
/// earliest in registry order.
pub fn route_schemas(
    lexicon: &Lexicon,
    registry: &SchemaRegistry,
    d: &Decomposition,
) -> Result<Vec<SchemaName>, LmError> {
    let base: Vec<SchemaName> = action_groups(lexicon, registry, &d.actions)?
        .iter()
        .map(|g| g.schema)
        .collect();
    let needs = requirements(lexicon, d)?;
    let rest: Vec<SchemaName> = registry.names().filter(|s| !base.contains(s)).collect();
    let covered = |set: &[SchemaName]| {
        needs.iter().all(|fields| {
            set.iter().any(|s| {
                registry
                    .get(*s)
                    .is_some_and(|schema| fields.iter().any(|f| schema.has_field(f)))
            })
        })
    };
    let mut subsets: Vec<u32> = (0..1u32 << rest.len()).collect();
    subsets.sort_by_key(|m| (m.count_ones(), std::cmp::Reverse(m.reverse_bits())));
    for mask in subsets {
        let mut set = base.clone();
        set.extend(
            rest.iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, s)| *s),
        );
        if covered(&set) {
            return Ok(set);
        }
    }
    let missing: Vec<String> = needs
        .iter()
        .filter(|fields| {
            !registry
                .iter()
                .any(|s| fields.iter().any(|f| s.has_field(f)))
        })
        .map(|f| f.join("|"))
        .collect();
    Err(LmError::Routing(format!("no registered schema has {}", missing.join(", "))))
}

struct Builder<'a> {
    registry: &'a SchemaRegistry,
    schemas: Vec<SchemaName>,
    clauses: Vec<Vec<FilterClause>>,
}

impl Builder<'_> {
    /// Index of the first schema (primary first) declaring one of `fields`,
    /// with the chosen field.
    fn place<'f>(&self, fields: &[&'f str]) -> Option<(usize, &'f str)> {
        self.schemas.iter().enumerate().find_map(|(i, s)| {
            let schema = self.registry.get(*s)?;
            fields.iter().find(|f| schema.has_field(f)).map(|f| (i, *f))
        })
    }

    fn add(&mut self, at: usize, clause: FilterClause) -> Result<(), LmError> {
        let schema = self
            .registry
            .get(self.schemas[at])
            .ok_or_else(|| LmError::Formulation(format!("unknown schema '{}'", self.schemas[at])))?;
        validate_filter(schema, &clause)
            .map_err(|v| LmError::Formulation(format!("illegal clause {clause}: {v}")))?;
        merge(&mut self.clauses[at], clause).map_err(LmError::Formulation)
    }
}

/// Compiles a resolved decomposition into a canonical plan over `schemas`.
pub fn formulate(
    lexicon: &Lexicon,
    registry: &SchemaRegistry,
    d: &Decomposition,
    schemas: &[SchemaName],
) -> Result<QueryPlan, LmError> {
    let groups = action_groups(lexicon, registry, &d.actions)?;
    let mut order: Vec<SchemaName> = vec![groups[0].schema];
    order.extend(schemas.iter().copied().filter(|s| *s != groups[0].schema));
    let mut b = Builder {
        registry,
        clauses: vec![Vec::new(); order.len()],
        schemas: order,
    };
    for g in &groups {
        let at = b.schemas.iter().position(|s| *s == g.schema).ok_or_else(|| {
            LmError::Formulation(format!("schema '{}' was not selected", g.schema))
        })?;
        for c in &g.clauses {
            b.add(at, c.clone())?;
        }
    }
    for e in &d.entities {
        let id = e
            .resolved_id
            .as_ref()
            .ok_or_else(|| LmError::Formulation(format!("entity '{}' is unresolved", e.mention)))?;
        let (at, field) = b.place(entity_fields(e)).ok_or_else(|| {
            LmError::Formulation(format!("no selected schema can filter on '{}'", e.mention))
        })?;
        let clause = match id {
            EntityId::Player(n) => FilterClause::term(field, *n),
            EntityId::Team(t) => FilterClause::term(field, t.as_str()),
        };
        b.add(at, clause)?;
    }
    for label in &d.conditions {
        let (entry, captured) = lexicon
            .condition_for_label(label)
            .ok_or_else(|| LmError::Formulation(format!("unconsumed condition '{label}'")))?;
        let fields: Vec<&str> = entry.fields().collect();
        let (at, field) = b.place(&fields).ok_or_else(|| {
            LmError::Formulation(format!("unconsumed condition '{label}': no selected schema has {}", entry.field))
        })?;
        let clause = entry
            .clause(field, captured.as_deref())
            .map_err(LmError::Formulation)?;
        b.add(at, clause)?;
    }
    let mut requests = Vec::new();
    for (schema, clauses) in b.schemas.into_iter().zip(b.clauses) {
        check_consistency(&clauses).map_err(LmError::Formulation)?;
        requests.push(SearchRequest::new(schema, clauses));
    }
    Ok(QueryPlan::new(requests).canonical())
}

/// Pulls `(field, suggestion)` out of an executor message of the form
/// `unknown field 'X' in schema 'S' (did you mean 'Y'?)`.
pub fn suggested_fix(error: &str) -> Option<(String, String)> {
    fn quoted_after<'a>(s: &'a str, marker: &str) -> Option<&'a str> {
        let rest = &s[s.find(marker)? + marker.len()..];
        rest.split('\'').next()
    }
    let field = quoted_after(error, "unknown field '")?;
    let suggestion = quoted_after(error, "did you mean '")?;
    Some((field.to_string(), suggestion.to_string()))
}

/// Applies a "did you mean" suggestion, or reformulates from scratch.
pub fn repair(
    lexicon: &Lexicon,
    registry: &SchemaRegistry,
    error: &str,
    failed: Option<&QueryPlan>,
    d: &Decomposition,
    schemas: &[SchemaName],
) -> Result<(QueryPlan, String), LmError> {
    if let (Some((bad, good)), Some(plan)) = (suggested_fix(error), failed) {
        let mut fixed = plan.clone();
        let mut touched = false;
        for r in &mut fixed.requests {
            for c in &mut r.clauses {
                if c.field() == bad {
                    *c.field_mut() = good.clone();
                    touched = true;
                }
            }
        }
        if touched {
            return Ok((
                fixed.canonical(),
                format!("renamed unknown field '{bad}' to suggested '{good}'"),
            ));
        }
    }
    let plan = formulate(lexicon, registry, d, schemas)?;
    Ok((plan, format!("reformulated after error: {error}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundled;
    use crate::request::Cmp;

    fn decomp(actions: &[&str], conditions: &[&str], entities: Vec<EntityMention>) -> Decomposition {
        Decomposition {
            entities,
            actions: actions.iter().map(|s| s.to_string()).collect(),
            conditions: conditions.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn player(id: i64) -> EntityMention {
        let mut e = EntityMention::new("P", EntityKind::Player, EntityRole::Actor);
        e.resolved_id = Some(EntityId::Player(id));
        e
    }

    #[test]
    fn routes_single_schemas() {
        let (lex, reg) = (bundled::lexicon(), bundled::registry());
        let r = |a: &[&str], c: &[&str]| route_schemas(&lex, &reg, &decomp(a, c, vec![player(1)])).unwrap();
        assert_eq!(r(&["touchdown throw"], &[">10 yards"]), [SchemaName::Passing]);
        assert_eq!(r(&["rush"], &[">=5 yards"]), [SchemaName::Rushing]);
    }

    #[test]
    fn passer_with_defender_alignment_routes_to_both() {
        let (lex, reg) = (bundled::lexicon(), bundled::registry());
        let d = decomp(&["pass"], &["edge alignment"], vec![player(43091)]);
        assert_eq!(
            route_schemas(&lex, &reg, &d).unwrap(),
            [SchemaName::Passing, SchemaName::Defense]
        );
        let plan = formulate(&lex, &reg, &d, &[SchemaName::Passing, SchemaName::Defense]).unwrap();
        assert_eq!(
            plan.canonical_json(),
            r#"[{"schema":"defense","clauses":[{"op":"term","field":"playerAlignmentEDGE","value":1}]},{"schema":"passing","clauses":[{"op":"term","field":"nflId","value":43091},{"op":"term","field":"playType","value":"PASS"}]}]"#
        );
    }

    #[test]
    fn generic_touchdown_folds_into_specific_action() {
        let (lex, reg) = (bundled::lexicon(), bundled::registry());
        let g = action_groups(&lex, &reg, &["touchdown".into(), "pass".into()]).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(g[0].schema, SchemaName::Passing);
        assert_eq!(g[0].clauses.len(), 2);
    }

    #[test]
    fn table_row_two_formulation() {
        let (lex, reg) = (bundled::lexicon(), bundled::registry());
        let d = decomp(
            &["touchdown throw"],
            &["season 2022", "regular season", ">10 yards"],
            vec![player(43091)],
        );
        let plan = formulate(&lex, &reg, &d, &[SchemaName::Passing]).unwrap();
        let expect = SearchRequest::new(
            SchemaName::Passing,
            vec![
                FilterClause::term("nflId", 43091),
                FilterClause::term("season", 2022),
                FilterClause::term("seasonType", "REG"),
                FilterClause::term("playType", "PASS"),
                FilterClause::term("touchdown", 1),
                FilterClause::range("passYards", Cmp::Gt, 10.0),
            ],
        );
        assert_eq!(plan.canonical_json(), QueryPlan::single(expect).canonical_json());
    }

    #[test]
    fn minimal_request_has_actor_and_action_only() {
        let (lex, reg) = (bundled::lexicon(), bundled::registry());
        let plan = formulate(&lex, &reg, &decomp(&["rush"], &[], vec![player(7)]), &[SchemaName::Rushing]).unwrap();
        assert_eq!(plan.requests[0].clauses.len(), 2);
    }

    #[test]
    fn contradictory_ranges_fail_formulation() {
        let (lex, reg) = (bundled::lexicon(), bundled::registry());
        let d = decomp(&["pass"], &[">10 yards", "<5 yards"], vec![]);
        let err = formulate(&lex, &reg, &d, &[SchemaName::Passing]).unwrap_err();
        assert_eq!(err, LmError::Formulation("unsatisfiable range on field 'passYards'".into()));
    }

    #[test]
    fn unknown_condition_is_unconsumed() {
        let (lex, reg) = (bundled::lexicon(), bundled::registry());
        let d = decomp(&["pass"], &["sneezed"], vec![]);
        let err = formulate(&lex, &reg, &d, &[SchemaName::Passing]).unwrap_err();
        assert!(err.to_string().contains("unconsumed condition 'sneezed'"));
    }

    #[test]
    fn repair_applies_suggestion() {
        let (lex, reg) = (bundled::lexicon(), bundled::registry());
        let broken = QueryPlan::single(SearchRequest::new(
            SchemaName::Passing,
            vec![FilterClause::term("touchdowm", 1)],
        ));
        let msg = "unknown field 'touchdowm' in schema 'passing' (did you mean 'touchdown'?)";
        assert_eq!(suggested_fix(msg), Some(("touchdowm".into(), "touchdown".into())));
        let (fixed, _) = repair(&lex, &reg, msg, Some(&broken), &Decomposition::default(), &[]).unwrap();
        assert_eq!(fixed.requests[0].clauses, [FilterClause::term("touchdown", 1)]);
    }
}
