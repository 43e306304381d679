//! Tab-delimited bibliographic exports: parsing, deduplication, collaboration
//! classes and aggregation into subfields through a journal classification.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::{BufRead, BufReader, Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::SubfieldAggregate;
use crate::error::{invalid, Error, Result};
use crate::scaling::Mode;

/// Document types kept by the export filter.
pub const ACCEPTED_DOC_TYPES: [&str; 5] =
    ["Article", "Review", "Letter", "Note", "Proceedings Paper"];

/// Header names of the export columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnNames {
    pub authors: String,
    pub title: String,
    pub journal: String,
    pub doc_type: String,
    pub times_cited: String,
    pub year: String,
    pub record_id: String,
}

impl Default for ColumnNames {
    fn default() -> Self {
        Self {
            authors: "AU".into(),
            title: "TI".into(),
            journal: "SO".into(),
            doc_type: "DT".into(),
            times_cited: "TC".into(),
            year: "PY".into(),
            record_id: "UT".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BiblioRecord {
    pub record_id: String,
    pub authors: Vec<String>,
    pub title: String,
    pub journal: String,
    pub doc_type: String,
    pub citations: u64,
    pub year: i32,
}

/// A data row that did not become a record. `row` counts the header as row 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    pub row: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParsedExport {
    pub records: Vec<BiblioRecord>,
    /// Source row of each record.
    pub rows: Vec<usize>,
    pub rejections: Vec<Rejection>,
}

fn split_authors(field: &str) -> Vec<String> {
    field
        .split(';')
        .map(str::trim)
        .filter(|a| !a.is_empty())
        .map(String::from)
        .collect()
}

/// True when one of the `;`-separated document types is accepted.
pub fn doc_type_accepted(doc_type: &str) -> bool {
    doc_type
        .split(';')
        .map(str::trim)
        .any(|t| ACCEPTED_DOC_TYPES.iter().any(|a| a.eq_ignore_ascii_case(t)))
}

struct ColumnIndex {
    authors: usize,
    title: usize,
    journal: usize,
    doc_type: usize,
    times_cited: usize,
    year: usize,
    record_id: usize,
}

impl ColumnIndex {
    fn locate(header: &[&str], names: &ColumnNames) -> Result<Self> {
        let find = |name: &str| {
            header
                .iter()
                .position(|h| h.trim_start_matches('\u{feff}').trim() == name)
                .ok_or_else(|| Error::MissingColumn(name.to_string()))
        };
        Ok(Self {
            authors: find(&names.authors)?,
            title: find(&names.title)?,
            journal: find(&names.journal)?,
            doc_type: find(&names.doc_type)?,
            times_cited: find(&names.times_cited)?,
            year: find(&names.year)?,
            record_id: find(&names.record_id)?,
        })
    }

    fn max(&self) -> usize {
        [
            self.authors,
            self.title,
            self.journal,
            self.doc_type,
            self.times_cited,
            self.year,
            self.record_id,
        ]
        .into_iter()
        .max()
        .unwrap_or(0)
    }
}

/// Parses an export, keeping accepted document types and the first occurrence
/// of every unique id. Everything else is reported with its row number.
pub fn parse_export(reader: impl Read, names: &ColumnNames) -> Result<ParsedExport> {
    let mut lines = BufReader::new(reader).lines();
    let header = match lines.next() {
        Some(h) => h?,
        None => return Err(Error::EmptyInput("export has no header row")),
    };
    let header: Vec<&str> = header.trim_end_matches('\r').split('\t').collect();
    let idx = ColumnIndex::locate(&header, names)?;
    let mut out = ParsedExport::default();
    let mut seen = HashSet::new();

    for (i, line) in lines.enumerate() {
        let row_no = i + 2;
        let line = line?;
        let row: Vec<&str> = line.trim_end_matches('\r').split('\t').collect();
        if row.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        let mut reject = |reason: String| {
            out.rejections.push(Rejection {
                row: row_no,
                reason,
            })
        };
        if row.len() <= idx.max() {
            reject(format!(
                "expected at least {} fields, found {}",
                idx.max() + 1,
                row.len()
            ));
            continue;
        }
        let field = |j: usize| row[j].trim();
        let record_id = field(idx.record_id);
        if record_id.is_empty() {
            reject("missing unique id".into());
            continue;
        }
        let doc_type = field(idx.doc_type);
        if !doc_type_accepted(doc_type) {
            reject(format!("document type `{doc_type}` not accepted"));
            continue;
        }
        let tc = field(idx.times_cited);
        let Ok(citations) = tc.parse::<u64>() else {
            reject(format!("unparseable times cited `{tc}`"));
            continue;
        };
        let py = field(idx.year);
        let Ok(year) = py.parse::<i32>() else {
            reject(format!("unparseable year `{py}`"));
            continue;
        };
        if !seen.insert(record_id.to_string()) {
            reject(format!("duplicate record `{record_id}`"));
            continue;
        }
        out.records.push(BiblioRecord {
            record_id: record_id.to_string(),
            authors: split_authors(field(idx.authors)),
            title: field(idx.title).to_string(),
            journal: field(idx.journal).to_string(),
            doc_type: doc_type.to_string(),
            citations,
            year,
        });
        out.rows.push(row_no);
    }
    Ok(out)
}

/// Writes records in the export layout with the default column names.
pub fn write_export(records: &[BiblioRecord], out: impl Write) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .delimiter(b'\t')
        .quote_style(csv::QuoteStyle::Never)
        .from_writer(out);
    let names = ColumnNames::default();
    w.write_record([
        &names.authors,
        &names.title,
        &names.journal,
        &names.doc_type,
        &names.times_cited,
        &names.year,
        &names.record_id,
    ])?;
    for r in records {
        w.write_record([
            r.authors.join("; "),
            r.title.clone(),
            r.journal.clone(),
            r.doc_type.clone(),
            r.citations.to_string(),
            r.year.to_string(),
            r.record_id.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Collaboration {
    Collaboration,
    NoCollaboration,
}

/// More than one author means collaboration; affiliations play no part.
pub fn classify_collaboration(record: &BiblioRecord) -> Result<Collaboration> {
    match record.authors.len() {
        0 => Err(Error::AnonymousRecord(record.record_id.clone())),
        1 => Ok(Collaboration::NoCollaboration),
        _ => Ok(Collaboration::Collaboration),
    }
}

/// Inclusive publication-year window, written `2005-2007` or `2006`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct YearRange {
    pub first: i32,
    pub last: i32,
}

impl YearRange {
    pub fn contains(&self, year: i32) -> bool {
        (self.first..=self.last).contains(&year)
    }
}

impl FromStr for YearRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || invalid("years", format!("expected YEAR or FIRST-LAST, got `{s}`"));
        let (a, b) = s.split_once('-').unwrap_or((s, s));
        let first: i32 = a.trim().parse().map_err(|_| bad())?;
        let last: i32 = b.trim().parse().map_err(|_| bad())?;
        if first > last {
            return Err(bad());
        }
        Ok(Self { first, last })
    }
}

impl fmt::Display for YearRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.first, self.last)
    }
}

/// Case-folded, whitespace-collapsed journal name with `&` spelled `and`.
pub fn normalize_journal(name: &str) -> String {
    name.to_lowercase()
        .replace('&', " and ")
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub field_id: String,
    pub subfield_id: String,
}

/// Journal to subfield assignments.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClassificationMap {
    entries: BTreeMap<String, Classification>,
}

#[derive(Deserialize)]
struct MapRow {
    journal: String,
    field: String,
    subfield: String,
}

impl ClassificationMap {
    /// Reads a `journal,field,subfield` CSV. A journal listed under two
    /// subfields or a subfield under two fields is an error.
    pub fn read_csv(reader: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut map = Self::default();
        for (i, row) in rdr.deserialize::<MapRow>().enumerate() {
            let row = row.map_err(|e| Error::Parse {
                line: i + 2,
                reason: e.to_string(),
            })?;
            map.insert(&row.journal, &row.field, &row.subfield)?;
        }
        Ok(map)
    }

    pub fn insert(&mut self, journal: &str, field_id: &str, subfield_id: &str) -> Result<()> {
        if let Some((_, other)) = self
            .entries
            .iter()
            .find(|(_, c)| c.subfield_id == subfield_id && c.field_id != field_id)
        {
            return Err(invalid(
                "mapping",
                format!(
                    "subfield `{subfield_id}` assigned to fields `{}` and `{field_id}`",
                    other.field_id
                ),
            ));
        }
        let entry = Classification {
            field_id: field_id.to_string(),
            subfield_id: subfield_id.to_string(),
        };
        match self.entries.get(&normalize_journal(journal)) {
            Some(existing) if *existing != entry => Err(invalid(
                "mapping",
                format!(
                    "journal `{journal}` assigned to subfields `{}` and `{subfield_id}`",
                    existing.subfield_id
                ),
            )),
            _ => {
                self.entries.insert(normalize_journal(journal), entry);
                Ok(())
            }
        }
    }

    pub fn lookup(&self, journal: &str) -> Option<&Classification> {
        self.entries.get(&normalize_journal(journal))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Why a record was left out of the aggregates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Omission {
    UnmappedJournal,
    Anonymous,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AggregateReport {
    /// Sorted by subfield id.
    pub aggregates: Vec<SubfieldAggregate>,
    /// Index into the input records with the reason it was omitted.
    pub omitted: Vec<(usize, Omission)>,
}

impl AggregateReport {
    pub fn mapped_records(&self) -> u64 {
        self.aggregates.iter().map(|a| a.papers_total).sum()
    }
}

/// Sums papers and citations per subfield and collaboration class.
pub fn build_aggregates(
    records: &[BiblioRecord],
    map: &ClassificationMap,
) -> Result<AggregateReport> {
    if map.is_empty() {
        return Err(Error::EmptyMapping);
    }
    let mut groups: BTreeMap<&str, SubfieldAggregate> = BTreeMap::new();
    let mut omitted = Vec::new();
    for (i, rec) in records.iter().enumerate() {
        let Some(class) = map.lookup(&rec.journal) else {
            omitted.push((i, Omission::UnmappedJournal));
            continue;
        };
        let Ok(collab) = classify_collaboration(rec) else {
            omitted.push((i, Omission::Anonymous));
            continue;
        };
        let agg = groups.entry(class.subfield_id.as_str()).or_insert_with(|| {
            SubfieldAggregate::from_parts(&class.subfield_id, &class.field_id, (0, 0), (0, 0))
        });
        agg.papers_total += 1;
        agg.citations_total += rec.citations;
        match collab {
            Collaboration::Collaboration => {
                agg.papers_collab += 1;
                agg.citations_collab += rec.citations;
            }
            Collaboration::NoCollaboration => {
                agg.papers_single += 1;
                agg.citations_single += rec.citations;
            }
        }
    }
    Ok(AggregateReport {
        aggregates: groups.into_values().collect(),
        omitted,
    })
}

/// Citation counts of the mapped records that belong to `mode`.
pub fn mode_counts(records: &[BiblioRecord], map: &ClassificationMap, mode: Mode) -> Vec<u64> {
    records
        .iter()
        .filter(|r| map.lookup(&r.journal).is_some())
        .filter(|r| match (mode, classify_collaboration(r)) {
            (_, Err(_)) => false,
            (Mode::Overall, Ok(_)) => true,
            (Mode::Collaboration, Ok(c)) => c == Collaboration::Collaboration,
            (Mode::Single, Ok(c)) => c == Collaboration::NoCollaboration,
        })
        .map(|r| r.citations)
        .collect()
}

/// Writes the `row<TAB>reason` rejection report.
pub fn write_rejections(rejections: &[Rejection], out: impl Write) -> Result<()> {
    let mut w = csv::WriterBuilder::new().delimiter(b'\t').from_writer(out);
    for r in rejections {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{format_percent, partition_shares, summarize_partition, CitationSample};
    use proptest::prelude::*;

    const HEADER: &str = "PT\tAU\tTI\tSO\tDT\tTC\tPY\tUT";

    fn export(rows: &[&str]) -> String {
        let mut s = String::from(HEADER);
        for r in rows {
            s.push('\n');
            s.push_str(r);
        }
        s
    }

    fn record(id: &str, authors: &[&str], journal: &str, citations: u64) -> BiblioRecord {
        BiblioRecord {
            record_id: id.into(),
            authors: authors.iter().map(|a| a.to_string()).collect(),
            title: format!("title {id}"),
            journal: journal.into(),
            doc_type: "Article".into(),
            citations,
            year: 2006,
        }
    }

    #[test]
    fn book_reviews_are_filtered() {
        let text = export(&[
            "J\tSmith, A; Jones, B\tOne\tNATURE\tArticle\t17\t2006\tWOS:1",
            "J\tLee, C\tTwo\tNATURE\tBook Review\t0\t2006\tWOS:2",
            "J\tKim, D\tThree\tSCIENCE\tLetter\t3\t2005\tWOS:3",
        ]);
        let p = parse_export(text.as_bytes(), &ColumnNames::default()).unwrap();
        assert_eq!(p.records.len(), 2);
        assert_eq!(p.records[0].citations, 17);
        assert_eq!(p.records[0].authors, vec!["Smith, A", "Jones, B"]);
        assert_eq!(p.rows, vec![2, 4]);
        assert_eq!(p.rejections.len(), 1);
        assert_eq!(p.rejections[0].row, 3);
        assert!(p.rejections[0].reason.contains("Book Review"));
    }

    #[test]
    fn compound_doc_types_match_by_segment() {
        assert!(doc_type_accepted("Article; Proceedings Paper"));
        assert!(doc_type_accepted("review"));
        assert!(!doc_type_accepted("Book Review"));
        assert!(!doc_type_accepted("Editorial Material"));
    }

    #[test]
    fn duplicates_keep_the_first_occurrence() {
        let text = export(&[
            "J\tA\tOne\tX\tArticle\t5\t2006\tWOS:1",
            "J\tB\tOne again\tX\tArticle\t9\t2006\tWOS:1",
        ]);
        let p = parse_export(text.as_bytes(), &ColumnNames::default()).unwrap();
        assert_eq!(p.records.len(), 1);
        assert_eq!(p.records[0].citations, 5);
        assert_eq!(p.rejections[0].row, 3);
        assert!(p.rejections[0].reason.starts_with("duplicate record"));
    }

    #[test]
    fn bad_rows_are_reported_with_row_numbers() {
        let text = export(&[
            "J\tA\tOne\tX\tArticle\tmany\t2006\tWOS:1",
            "J\tA\tTwo\tX\tArticle\t4\tsoon\tWOS:2",
            "J\tA\tThree",
            "",
            "J\tA\tFour\tX\tArticle\t4\t2007\t",
            "J\tA\tFive\tX\tArticle\t 8 \t2007\tWOS:5",
        ]);
        let p = parse_export(text.as_bytes(), &ColumnNames::default()).unwrap();
        assert_eq!(p.records.len(), 1);
        assert_eq!(p.records[0].citations, 8);
        let rows: Vec<usize> = p.rejections.iter().map(|r| r.row).collect();
        assert_eq!(rows, vec![2, 3, 4, 6]);
        assert!(p.rejections[0].reason.contains("`many`"));
    }

    #[test]
    fn header_problems() {
        let err = parse_export(
            "AU\tTI\tSO\tDT\tPY\tUT\n".as_bytes(),
            &ColumnNames::default(),
        )
        .unwrap_err();
        assert_eq!(err.to_string(), "missing required column `TC`");
        assert!(matches!(
            parse_export("".as_bytes(), &ColumnNames::default()),
            Err(Error::EmptyInput(_))
        ));
        let bom = "\u{feff}AU\tTI\tSO\tDT\tTC\tPY\tUT\nA\tt\tJ\tNote\t1\t2006\tid1\n";
        let p = parse_export(bom.as_bytes(), &ColumnNames::default()).unwrap();
        assert_eq!(p.records.len(), 1);
    }

    #[test]
    fn custom_column_names() {
        let names = ColumnNames {
            authors: "Authors".into(),
            title: "Title".into(),
            journal: "Source".into(),
            doc_type: "Type".into(),
            times_cited: "Cited".into(),
            year: "Year".into(),
            record_id: "Id".into(),
        };
        let text =
            "Id\tAuthors\tTitle\tSource\tType\tCited\tYear\nk1\tA; B\tT\tJ\tArticle\t2\t2007\n";
        let p = parse_export(text.as_bytes(), &names).unwrap();
        assert_eq!(p.records[0].record_id, "k1");
        assert_eq!(p.records[0].authors.len(), 2);
    }

    #[test]
    fn collaboration_depends_on_author_count_only() {
        let three = record("1", &["A", "B", "C"], "J", 0);
        assert_eq!(
            classify_collaboration(&three).unwrap(),
            Collaboration::Collaboration
        );
        let one = record("2", &["A (Univ X; Univ Y)"], "J", 0);
        assert_eq!(
            classify_collaboration(&one).unwrap(),
            Collaboration::NoCollaboration
        );
        let none = record("3", &[], "J", 0);
        assert_eq!(
            classify_collaboration(&none).unwrap_err().to_string(),
            "anonymous record `3`"
        );
    }

    #[test]
    fn empty_author_segments_do_not_count() {
        assert_eq!(split_authors("A; ;B;"), vec!["A", "B"]);
        assert!(split_authors(" ; ").is_empty());
    }

    #[test]
    fn journal_names_are_normalized() {
        assert_eq!(
            normalize_journal("  Journal of  Physics & Chemistry "),
            "journal of physics and chemistry"
        );
        let mut map = ClassificationMap::default();
        map.insert("Physics & Chemistry", "NS", "Chem").unwrap();
        assert!(map.lookup("PHYSICS AND   CHEMISTRY").is_some());
        assert!(map.lookup("physics chemistry").is_none());
    }

    #[test]
    fn conflicting_mappings_are_rejected() {
        let mut map = ClassificationMap::default();
        map.insert("A", "F1", "S1").unwrap();
        map.insert("a", "F1", "S1").unwrap();
        assert!(map.insert("A", "F1", "S2").is_err());
        assert!(map.insert("B", "F2", "S1").is_err());
        let csv = "journal,field,subfield\nNature,NS,General\nScience , NS , General\n";
        let map = ClassificationMap::read_csv(csv.as_bytes()).unwrap();
        assert_eq!(map.len(), 2);
        assert_eq!(map.lookup("science").unwrap().subfield_id, "General");
    }

    // Aggregate hand-summed from the fixture below.
    #[test]
    fn four_record_fixture() {
        let mut map = ClassificationMap::default();
        map.insert("J", "F", "S").unwrap();
        let recs = vec![
            record("1", &["A", "B"], "J", 5),
            record("2", &["A", "C"], "J", 5),
            record("3", &["A", "B", "C"], "J", 10),
            record("4", &["D"], "J", 4),
        ];
        let rep = build_aggregates(&recs, &map).unwrap();
        assert_eq!(
            rep.aggregates,
            vec![SubfieldAggregate::from_parts("S", "F", (3, 1), (20, 4))]
        );
        assert_eq!(rep.aggregates[0].papers_total, 4);
        assert_eq!(rep.aggregates[0].citations_total, 24);
    }

    #[test]
    fn unmapped_and_anonymous_records_are_reported() {
        let mut map = ClassificationMap::default();
        map.insert("J", "F", "S").unwrap();
        map.insert("Empty", "F", "T").unwrap();
        let recs = vec![
            record("1", &["A"], "J", 1),
            record("2", &["A"], "Other", 1),
            record("3", &[], "J", 1),
        ];
        let rep = build_aggregates(&recs, &map).unwrap();
        assert_eq!(rep.aggregates.len(), 1);
        assert_eq!(
            rep.omitted,
            vec![(1, Omission::UnmappedJournal), (2, Omission::Anonymous)]
        );
        assert!(matches!(
            build_aggregates(&recs, &ClassificationMap::default()),
            Err(Error::EmptyMapping)
        ));
    }

    #[test]
    fn corpus_shares_at_published_proportions() {
        let mut map = ClassificationMap::default();
        map.insert("J", "F", "S").unwrap();
        let mut recs = Vec::new();
        // 7263 collaborative papers with 152570 citations, 996 single with 12333.
        for i in 0..7263u64 {
            let c = 21 + u64::from(i < 47);
            recs.push(record(&format!("c{i}"), &["A", "B"], "J", c));
        }
        for i in 0..996u64 {
            let c = 12 + u64::from(i < 381);
            recs.push(record(&format!("s{i}"), &["A"], "J", c));
        }
        let rep = build_aggregates(&recs, &map).unwrap();
        let a = &rep.aggregates[0];
        assert_eq!(a.citations_collab, 152_570);
        assert_eq!(a.citations_single, 12_333);
        let collab = mode_counts(&recs, &map, Mode::Collaboration);
        let single = mode_counts(&recs, &map, Mode::Single);
        let (c, s) = summarize_partition(
            &CitationSample::new("collab", collab).unwrap(),
            &CitationSample::new("single", single).unwrap(),
        );
        assert_eq!(format_percent(c.share_papers), "88%");
        assert_eq!(format_percent(s.share_papers), "12%");
        let shares = partition_shares(&c, &s).unwrap();
        assert_eq!(format_percent(shares.collab_share), "93%");
        assert_eq!(format_percent(shares.single_share), "7%");
    }

    #[test]
    fn year_ranges() {
        let r: YearRange = "2005-2007".parse().unwrap();
        assert!(r.contains(2005) && r.contains(2007) && !r.contains(2008));
        assert_eq!(
            "2006".parse::<YearRange>().unwrap(),
            YearRange {
                first: 2006,
                last: 2006
            }
        );
        assert!("2007-2005".parse::<YearRange>().is_err());
        assert!("x".parse::<YearRange>().is_err());
    }

    #[test]
    fn rejection_report_layout() {
        let mut buf = Vec::new();
        write_rejections(
            &[Rejection {
                row: 3,
                reason: "bad".into(),
            }],
            &mut buf,
        )
        .unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "row\treason\n3\tbad\n");
    }

    fn arb_text() -> impl Strategy<Value = String> {
        "[A-Za-z0-9][A-Za-z0-9 ,.()-]{0,20}[A-Za-z0-9]"
    }

    fn arb_record() -> impl Strategy<Value = BiblioRecord> {
        (
            "[A-Z0-9:]{3,12}",
            prop::collection::vec(arb_text(), 0..5),
            arb_text(),
            prop::sample::select(vec!["J1", "J2", "J3", "Unlisted"]),
            prop::sample::select(ACCEPTED_DOC_TYPES.to_vec()),
            0u64..5000,
            1990i32..2020,
        )
            .prop_map(
                |(id, authors, title, journal, dt, citations, year)| BiblioRecord {
                    record_id: id,
                    authors,
                    title,
                    journal: journal.to_string(),
                    doc_type: dt.to_string(),
                    citations,
                    year,
                },
            )
    }

    fn arb_corpus() -> impl Strategy<Value = Vec<BiblioRecord>> {
        prop::collection::vec(arb_record(), 0..60).prop_map(|mut v| {
            let mut seen = HashSet::new();
            v.retain(|r| seen.insert(r.record_id.clone()));
            v
        })
    }

    fn small_map() -> ClassificationMap {
        let mut map = ClassificationMap::default();
        map.insert("J1", "F", "S1").unwrap();
        map.insert("J2", "F", "S1").unwrap();
        map.insert("J3", "G", "S2").unwrap();
        map
    }

    proptest! {
        #[test]
        fn export_round_trips(recs in arb_corpus()) {
            let mut buf = Vec::new();
            write_export(&recs, &mut buf).unwrap();
            let parsed = parse_export(buf.as_slice(), &ColumnNames::default()).unwrap();
            prop_assert!(parsed.rejections.is_empty());
            prop_assert_eq!(parsed.records, recs);
        }

        #[test]
        fn aggregation_conserves_records(recs in arb_corpus()) {
            let map = small_map();
            let rep = build_aggregates(&recs, &map).unwrap();
            let mapped = recs
                .iter()
                .filter(|r| map.lookup(&r.journal).is_some() && !r.authors.is_empty())
                .count() as u64;
            prop_assert_eq!(rep.mapped_records(), mapped);
            prop_assert_eq!(rep.mapped_records() + rep.omitted.len() as u64, recs.len() as u64);
            for a in &rep.aggregates {
                a.validate().unwrap();
            }
            let overall = mode_counts(&recs, &map, Mode::Overall);
            prop_assert_eq!(overall.len() as u64, mapped);
        }

        #[test]
        fn aggregation_ignores_record_order(mut recs in arb_corpus()) {
            let map = small_map();
            let a = build_aggregates(&recs, &map).unwrap().aggregates;
            recs.reverse();
            let b = build_aggregates(&recs, &map).unwrap().aggregates;
            prop_assert_eq!(a, b);
        }

        #[test]
        fn class_ignores_affiliation_text(mut rec in arb_record(), extra in arb_text()) {
            prop_assume!(!rec.authors.is_empty());
            let before = classify_collaboration(&rec).unwrap();
            rec.authors[0] = format!("{} ({extra})", rec.authors[0]);
            prop_assert_eq!(classify_collaboration(&rec).unwrap(), before);
        }
    }
}
