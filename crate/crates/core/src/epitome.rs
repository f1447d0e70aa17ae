//! Which reference-year populations look most like the world at a given date.
//!
//! Every entity is compared through its reference-year (2015) composition
//! against the World composition of a target year. Smaller Aitchison
//! distance means a more similar age structure; past one, the shapes are no
//! longer considered alike.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::coda::{aitchison_distance, Composition};
use crate::demographics::{pyramid_composition, Dataset, Delta, Entity, EntityKind, REFERENCE_YEAR, WORLD_ID};
use crate::error::EpitomeError;

pub const DEFAULT_THRESHOLD: f64 = 1.0;

/// Target years for the ranking tables.
pub const DEFAULT_WORLD_YEARS: [i32; 11] = [1990, 2000, 2010, 2015, 2020, 2030, 2040, 2050, 2060, 2070, 2080];

/// From this target year on, the nearest entries past the threshold are
/// appended so distant-future tables are not empty.
pub const APPENDIX_FROM_YEAR: i32 = 2060;
pub const APPENDIX_LEN: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpitomeOptions {
    pub reference_year: i32,
    pub threshold: f64,
    pub delta: Delta,
    pub appendix_from_year: i32,
    pub appendix_len: usize,
}

impl Default for EpitomeOptions {
    fn default() -> Self {
        Self {
            reference_year: REFERENCE_YEAR,
            threshold: DEFAULT_THRESHOLD,
            delta: Delta::Auto,
            appendix_from_year: APPENDIX_FROM_YEAR,
            appendix_len: APPENDIX_LEN,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpitomeEntry {
    pub rank: usize,
    pub entity_id: u32,
    pub name: String,
    pub kind: EntityKind,
    pub distance: f64,
    /// Distance exceeds the similarity threshold.
    pub beyond_threshold: bool,
    /// Either composition needed zero replacement.
    pub zero_replaced: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpitomeTable {
    pub world_year: i32,
    pub reference_year: i32,
    pub section: EntityKind,
    pub threshold: f64,
    pub entries: Vec<EpitomeEntry>,
}

/// One cell of a distance trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryPoint {
    pub entity_id: u32,
    pub name: String,
    pub world_year: i32,
    pub distance: f64,
}

/// Distances keyed by ISO3 code, for joining onto country geometries.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SimilarityMap {
    pub world_year: i32,
    pub values: BTreeMap<String, f64>,
    /// Countries without an ISO3 code.
    pub unmapped: Vec<Entity>,
}

struct Scored<'a> {
    entity: &'a Entity,
    distance: f64,
    zero_replaced: bool,
}

fn world_composition(data: &Dataset, year: i32, delta: Delta) -> Result<(Composition, bool), EpitomeError> {
    let p = data
        .pyramid(WORLD_ID, year)
        .ok_or(EpitomeError::MissingWorldPyramid(year))?;
    Ok(pyramid_composition(p, delta)?)
}

fn score<'a>(
    data: &Dataset,
    entities: &[&'a Entity],
    world: &(Composition, bool),
    opts: &EpitomeOptions,
) -> Result<Vec<Scored<'a>>, EpitomeError> {
    entities
        .par_iter()
        .map(|e| {
            let p = data
                .pyramid(e.id, opts.reference_year)
                .ok_or(EpitomeError::MissingReference {
                    id: e.id,
                    year: opts.reference_year,
                })?;
            let (c, replaced) = pyramid_composition(p, opts.delta)?;
            Ok(Scored {
                entity: e,
                distance: aitchison_distance(&c, &world.0)?,
                zero_replaced: replaced || world.1,
            })
        })
        .collect()
}

/// Ranks the entities of one section by distance to the World of `world_year`.
///
/// Entries within the threshold are listed in ascending distance, ties by
/// entity id. For `world_year >= opts.appendix_from_year` the nearest
/// `opts.appendix_len` entries beyond the threshold follow, flagged.
pub fn epitome_table(
    data: &Dataset,
    world_year: i32,
    section: EntityKind,
    opts: &EpitomeOptions,
) -> Result<EpitomeTable, EpitomeError> {
    let entities: Vec<&Entity> = data.catalog.of_kind(section).collect();
    if entities.is_empty() {
        return Err(EpitomeError::EmptySection(section.to_string()));
    }
    let world = world_composition(data, world_year, opts.delta)?;
    let mut scored = score(data, &entities, &world, opts)?;
    scored.sort_by(|a, b| a.distance.total_cmp(&b.distance).then(a.entity.id.cmp(&b.entity.id)));

    let within = scored.iter().take_while(|s| s.distance <= opts.threshold).count();
    let appendix = if world_year >= opts.appendix_from_year {
        opts.appendix_len
    } else {
        0
    };
    let entries = scored
        .iter()
        .take(within + appendix)
        .enumerate()
        .map(|(i, s)| EpitomeEntry {
            rank: i + 1,
            entity_id: s.entity.id,
            name: s.entity.name.clone(),
            kind: s.entity.kind,
            distance: s.distance,
            beyond_threshold: s.distance > opts.threshold,
            zero_replaced: s.zero_replaced,
        })
        .collect();

    Ok(EpitomeTable {
        world_year,
        reference_year: opts.reference_year,
        section,
        threshold: opts.threshold,
        entries,
    })
}

/// Unthresholded distance for every country with an ISO3 code.
pub fn similarity_map_values(
    data: &Dataset,
    world_year: i32,
    opts: &EpitomeOptions,
) -> Result<SimilarityMap, EpitomeError> {
    let world = world_composition(data, world_year, opts.delta)?;
    let countries: Vec<&Entity> = data.catalog.of_kind(EntityKind::Country).collect();
    let scored = score(data, &countries, &world, opts)?;
    let mut out = SimilarityMap {
        world_year,
        ..SimilarityMap::default()
    };
    for s in scored {
        match &s.entity.iso3 {
            Some(iso) => {
                out.values.insert(iso.clone(), s.distance);
            }
            None => out.unmapped.push(s.entity.clone()),
        }
    }
    Ok(out)
}

/// Full grid of distances for the given entities and target years, in
/// entity-major order.
pub fn distance_trajectory(
    data: &Dataset,
    entity_ids: &[u32],
    world_years: &[i32],
    opts: &EpitomeOptions,
) -> Result<Vec<TrajectoryPoint>, EpitomeError> {
    let mut references = Vec::with_capacity(entity_ids.len());
    for &id in entity_ids {
        let p = data
            .pyramid(id, opts.reference_year)
            .ok_or(EpitomeError::MissingReference {
                id,
                year: opts.reference_year,
            })?;
        let name = data.catalog.get(id).map(|e| e.name.clone()).unwrap_or_default();
        references.push((id, name, pyramid_composition(p, opts.delta)?.0));
    }
    let worlds = world_years
        .iter()
        .map(|&y| world_composition(data, y, opts.delta).map(|w| (y, w.0)))
        .collect::<Result<Vec<_>, _>>()?;

    let mut out = Vec::with_capacity(references.len() * worlds.len());
    for (id, name, c) in &references {
        for (year, w) in &worlds {
            out.push(TrajectoryPoint {
                entity_id: *id,
                name: name.clone(),
                world_year: *year,
                distance: aitchison_distance(c, w)?,
            });
        }
    }
    Ok(out)
}
