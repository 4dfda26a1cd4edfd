// SPDX-License-Identifier: Apache-2.0

//! Published figures used as comparison references.

use serde::Serialize;

use crate::metrics::HwTriple;

/// Published SG truth table, (input ABCD, output) pairs in row order.
pub const SG_TRUTH_TABLE: [(&str, &str); 16] = [
    ("0000", "0000"),
    ("0001", "0011"),
    ("0010", "0001"),
    ("0011", "0010"),
    ("0100", "0110"),
    ("0101", "0101"),
    ("0110", "0111"),
    ("0111", "0100"),
    ("1000", "1000"),
    ("1001", "1011"),
    ("1010", "1110"),
    ("1011", "1101"),
    ("1100", "1001"),
    ("1101", "1010"),
    ("1110", "1111"),
    ("1111", "1100"),
];

pub const PRIOR_TR: &str = "Thapliyal & Ranganathan (2010)";
pub const PRIOR_TSZ: &str = "Thapliyal, Srinivas & Zwolinski (2005)";
pub const PRIOR_TV: &str = "Thapliyal & Vinod (2007)";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PublishedRow {
    pub label: String,
    pub gates: u32,
    pub garbage: u32,
    pub delay: u32,
}

impl PublishedRow {
    pub fn new(label: &str, gates: u32, garbage: u32, delay: u32) -> Self {
        PublishedRow { label: label.to_string(), gates, garbage, delay }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PublishedHw {
    pub label: String,
    pub triple: HwTriple,
}

/// A documented difference between the computed and the published
/// hardware complexity: `computed = published + delta`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KnownGap {
    pub delta: HwTriple,
    pub note: String,
}

/// A comparison table: published figures for one design plus cited prior
/// work.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReferenceTable {
    pub id: String,
    pub title: String,
    /// Name of the reference netlist the "This work" row describes.
    pub design: String,
    pub this_work: PublishedRow,
    pub prior: Vec<PublishedRow>,
    pub hw_this_work: Option<HwTriple>,
    pub hw_prior: Vec<PublishedHw>,
    pub hw_known_gap: Option<KnownGap>,
}

pub const TABLE_IDS: [&str; 5] = ["I", "II", "III", "IV", "V"];

/// Comparison tables II..V.
pub fn reference_table(id: &str) -> Option<ReferenceTable> {
    let this = |g, w, d| PublishedRow::new("This work", g, w, d);
    Some(match id {
        "II" => ReferenceTable {
            id: "II".into(),
            title: "D-latch with output Q".into(),
            design: "d-latch-q".into(),
            this_work: this(1, 2, 1),
            prior: vec![PublishedRow::new(PRIOR_TR, 2, 2, 2)],
            hw_this_work: None,
            hw_prior: vec![],
            hw_known_gap: None,
        },
        "III" => ReferenceTable {
            id: "III".into(),
            title: "D-latch with outputs Q and Q'".into(),
            design: "d-latch-qq".into(),
            this_work: this(2, 2, 2),
            prior: vec![PublishedRow::new(PRIOR_TR, 3, 2, 3), PublishedRow::new(PRIOR_TSZ, 7, 6, 7)],
            hw_this_work: Some(HwTriple::new(5, 6, 3)),
            hw_prior: vec![PublishedHw { label: PRIOR_TV.into(), triple: HwTriple::new(4, 8, 4) }],
            hw_known_gap: Some(KnownGap {
                delta: HwTriple::new(0, 0, 1),
                note: "published 5α+6β+3δ leaves out the 1δ of the FG used as an inverter; \
                       the JK triple 7α+10β+7δ charges that same FG, so both cannot hold under one convention"
                    .into(),
            }),
        },
        "IV" => ReferenceTable {
            id: "IV".into(),
            title: "JK latch with output Q".into(),
            design: "jk-latch-q".into(),
            this_work: this(2, 3, 2),
            prior: vec![PublishedRow::new(PRIOR_TR, 3, 3, 3)],
            hw_this_work: None,
            hw_prior: vec![],
            hw_known_gap: None,
        },
        "V" => ReferenceTable {
            id: "V".into(),
            title: "JK latch with outputs Q and Q'".into(),
            design: "jk-latch-qq".into(),
            this_work: this(3, 3, 3),
            prior: vec![PublishedRow::new(PRIOR_TR, 4, 3, 4), PublishedRow::new(PRIOR_TSZ, 10, 12, 10)],
            hw_this_work: Some(HwTriple::new(7, 10, 7)),
            hw_prior: vec![PublishedHw { label: PRIOR_TV.into(), triple: HwTriple::new(6, 12, 8) }],
            hw_known_gap: None,
        },
        _ => return None,
    })
}
