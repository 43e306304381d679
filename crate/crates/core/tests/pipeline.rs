use citescale::dataset::{read_aggregates, write_aggregates, CitationSample};
use citescale::gof::{gof_test, GofResult};
use citescale::ingest::{build_aggregates, parse_export, ClassificationMap, ColumnNames};
use citescale::powerlaw::{
    fit_power_law, sample_power_law, DiscretePowerLaw, FitOptions, PowerLawFit,
};
use citescale::scaling::{points_from_aggregates, scaling_fit, Mode, ScalingFit};

fn options(seed: u64) -> FitOptions {
    FitOptions {
        bootstrap_reps: 20,
        seed,
        ..FitOptions::default()
    }
}

#[test]
fn fit_and_gof_survive_json_round_trip() {
    let model = DiscretePowerLaw::new(3, 2.6).unwrap();
    let sample = sample_power_law(&model, 4000, 11).unwrap();
    let fit = fit_power_law(&sample, &options(5)).unwrap();
    assert!((fit.alpha - 2.6).abs() < 0.15, "alpha {}", fit.alpha);

    let text = serde_json::to_string(&fit).unwrap();
    let back: PowerLawFit = serde_json::from_str(&text).unwrap();
    assert_eq!(back, fit);

    let gof = gof_test(&sample, &back, 40, 9).unwrap();
    let text = serde_json::to_string(&gof).unwrap();
    let again: GofResult = serde_json::from_str(&text).unwrap();
    assert_eq!(again, gof);
    assert_eq!(gof, gof_test(&sample, &fit, 40, 9).unwrap());
}

#[test]
fn counts_file_round_trip_preserves_fit() {
    let model = DiscretePowerLaw::new(1, 2.2).unwrap();
    let sample = sample_power_law(&model, 2000, 3).unwrap();
    let mut buf = Vec::new();
    sample.write_counts(&mut buf).unwrap();
    let read = CitationSample::read_counts("again", buf.as_slice()).unwrap();
    assert_eq!(read.counts(), sample.counts());
    let a = fit_power_law(&sample, &options(1)).unwrap();
    let b = fit_power_law(&read, &options(1)).unwrap();
    assert_eq!(
        (a.x_min, a.alpha, a.alpha_sd),
        (b.x_min, b.alpha, b.alpha_sd)
    );
}

#[test]
fn export_to_scaling_fit() {
    let mut export = String::from("UT\tAU\tTI\tSO\tDT\tTC\tPY\n");
    let mut map = String::from("journal,field,subfield\n");
    // Subfield s has 5 * s papers; citations grow faster than size.
    for s in 1..=6u64 {
        map.push_str(&format!("Journal {s},F,S{s}\n"));
        for i in 0..5 * s {
            let authors = if i % 2 == 0 { "Ann; Bob" } else { "Cy" };
            export.push_str(&format!(
                "W{s}-{i}\t{authors}\tT\tJournal {s}\tArticle\t{}\t2006\n",
                s * s + i % 3
            ));
        }
    }
    let parsed = parse_export(export.as_bytes(), &ColumnNames::default()).unwrap();
    assert!(parsed.rejections.is_empty());
    let map = ClassificationMap::read_csv(map.as_bytes()).unwrap();
    let report = build_aggregates(&parsed.records, &map).unwrap();
    assert_eq!(report.aggregates.len(), 6);
    assert_eq!(report.mapped_records(), parsed.records.len() as u64);

    let mut tsv = Vec::new();
    write_aggregates(&report.aggregates, &mut tsv).unwrap();
    let aggregates = read_aggregates(tsv.as_slice()).unwrap();
    assert_eq!(aggregates, report.aggregates);

    let (points, excluded) = points_from_aggregates(&aggregates, Mode::Overall);
    assert!(excluded.is_empty());
    let fit = scaling_fit(&points).unwrap();
    assert!(fit.exponent > 1.0, "exponent {}", fit.exponent);
    let back: ScalingFit = serde_json::from_str(&serde_json::to_string(&fit).unwrap()).unwrap();
    assert_eq!(back, fit);
}
