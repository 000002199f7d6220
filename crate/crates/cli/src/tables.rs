//! Plot-ready CSV tables. Column orders are part of the output contract and
//! frozen here.

use std::collections::BTreeMap;

use newsgraph::metrics::ConcordanceReport;
use newsgraph::polarization::{
    RankedCommunity, TriangleBin, UserActivityProfile, TRIANGLE_VERTICES,
};
use newsgraph::sentiment::{
    ControversyRecord, DensityBin, EmotionalDistanceRecord, EntityCommunitySentiment,
};

fn csv_string(build: impl FnOnce(&mut csv::Writer<Vec<u8>>)) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    build(&mut writer);
    String::from_utf8(writer.into_inner().expect("csv buffer")).expect("utf8")
}

pub fn top_communities_csv(ranked: &[RankedCommunity]) -> String {
    csv_string(|w| {
        w.write_record(["rank", "community", "activity", "share"]).unwrap();
        for (i, r) in ranked.iter().enumerate() {
            w.write_record([
                &(i + 1).to_string(),
                &r.label.to_string(),
                &r.activity.to_string(),
                &r.share.to_string(),
            ])
            .unwrap();
        }
    })
}

pub fn profiles_csv(profiles: &[UserActivityProfile]) -> String {
    csv_string(|w| {
        w.write_record(["user_id", "f1", "f2", "f3", "f_rest", "rho", "total_activity"])
            .unwrap();
        for p in profiles {
            w.write_record([
                p.user_id.as_str(),
                &p.fractions[0].to_string(),
                &p.fractions[1].to_string(),
                &p.fractions[2].to_string(),
                &p.fractions[3].to_string(),
                &p.rho.to_string(),
                &p.total_activity.to_string(),
            ])
            .unwrap();
        }
    })
}

pub fn triangle_csv(bins: &[TriangleBin], n_bins: u32) -> String {
    let height = TRIANGLE_VERTICES[2].1;
    csv_string(|w| {
        w.write_record(["x_bin", "y_bin", "x_center", "y_center", "count"]).unwrap();
        for b in bins {
            let x_center = (b.x_bin as f64 + 0.5) / n_bins as f64;
            let y_center = (b.y_bin as f64 + 0.5) / n_bins as f64 * height;
            w.write_record([
                &b.x_bin.to_string(),
                &b.y_bin.to_string(),
                &x_center.to_string(),
                &y_center.to_string(),
                &b.count.to_string(),
            ])
            .unwrap();
        }
    })
}

/// One PDF per community, stacked long-format.
pub fn pdf_csv(per_community: &[(u32, Vec<DensityBin>)]) -> String {
    csv_string(|w| {
        w.write_record(["community", "lo", "hi", "count", "density"]).unwrap();
        for (community, bins) in per_community {
            for b in bins {
                w.write_record([
                    &community.to_string(),
                    &b.lo.to_string(),
                    &b.hi.to_string(),
                    &b.count.to_string(),
                    &b.density.to_string(),
                ])
                .unwrap();
            }
        }
    })
}

pub fn entity_community_csv(records: &[EntityCommunitySentiment]) -> String {
    csv_string(|w| {
        w.write_record(["entity", "community", "mean_sentiment", "support"]).unwrap();
        for r in records {
            w.write_record([
                r.entity.as_str(),
                &r.community.to_string(),
                &r.mean_sentiment.to_string(),
                &r.support.to_string(),
            ])
            .unwrap();
        }
    })
}

pub fn emotional_distance_csv(records: &[EmotionalDistanceRecord]) -> String {
    csv_string(|w| {
        w.write_record(["entity", "mean_distance", "n_communities", "community_means"])
            .unwrap();
        for r in records {
            let means: Vec<String> = r
                .community_means
                .iter()
                .map(|(c, m)| format!("{c}:{m}"))
                .collect();
            w.write_record([
                r.entity.as_str(),
                &r.mean_distance.to_string(),
                &r.community_means.len().to_string(),
                &means.join("|"),
            ])
            .unwrap();
        }
    })
}

pub fn controversy_csv(records: &[ControversyRecord]) -> String {
    csv_string(|w| {
        w.write_record([
            "entity",
            "community",
            "post_mean",
            "user_mean",
            "distance",
            "controversial",
            "support",
        ])
        .unwrap();
        for r in records {
            w.write_record([
                r.entity.as_str(),
                &r.community.to_string(),
                &r.post_mean.to_string(),
                &r.user_mean.to_string(),
                &r.distance.to_string(),
                &r.controversial.to_string(),
                &r.support.to_string(),
            ])
            .unwrap();
        }
    })
}

pub fn user_means_csv(means: &BTreeMap<String, f64>) -> String {
    csv_string(|w| {
        w.write_record(["user_id", "mean_sentiment"]).unwrap();
        for (user, m) in means {
            w.write_record([user.as_str(), &m.to_string()]).unwrap();
        }
    })
}

/// Flat pairwise table of the concordance matrices.
pub fn concordance_flat_csv(report: &ConcordanceReport) -> String {
    csv_string(|w| {
        w.write_record(["a", "b", "rand", "nmi"]).unwrap();
        let n = report.names.len();
        for i in 0..n {
            for j in (i + 1)..n {
                w.write_record([
                    report.names[i].as_str(),
                    report.names[j].as_str(),
                    &report.pairwise_rand[i][j].to_string(),
                    &report.pairwise_nmi[i][j].to_string(),
                ])
                .unwrap();
            }
        }
    })
}

/// Source membership table; `None` marks sources outside every community
/// (isolated in the projected graph), written as "N".
pub fn membership_csv(rows: &[(String, String, Option<u32>)]) -> String {
    csv_string(|w| {
        w.write_record(["source_id", "display_name", "community"]).unwrap();
        for (id, name, community) in rows {
            let c = community.map(|c| c.to_string()).unwrap_or_else(|| "N".into());
            w.write_record([id.as_str(), name.as_str(), &c]).unwrap();
        }
    })
}

pub fn read_membership_csv(text: &str) -> anyhow::Result<Vec<(String, String, Option<u32>)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let community = match &record[2] {
            "N" => None,
            s => Some(s.parse::<u32>()?),
        };
        rows.push((record[0].to_string(), record[1].to_string(), community));
    }
    Ok(rows)
}

pub fn read_entity_community_csv(text: &str) -> anyhow::Result<Vec<EntityCommunitySentiment>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        rows.push(EntityCommunitySentiment {
            entity: record[0].to_string(),
            community: record[1].parse()?,
            mean_sentiment: record[2].parse()?,
            support: record[3].parse()?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn membership_round_trip_with_unassigned() {
        let rows = vec![
            ("s1".to_string(), "La Stampa".to_string(), Some(0)),
            ("s2".to_string(), "Avvenire".to_string(), None),
        ];
        let text = membership_csv(&rows);
        assert!(text.contains(",N"));
        let back = read_membership_csv(&text).unwrap();
        assert_eq!(back, rows);
    }

    #[test]
    fn entity_community_round_trip() {
        let rows = vec![EntityCommunitySentiment {
            entity: "renzi".into(),
            community: 2,
            mean_sentiment: -0.125,
            support: 7,
        }];
        let back = read_entity_community_csv(&entity_community_csv(&rows)).unwrap();
        assert_eq!(back, rows);
    }
}
