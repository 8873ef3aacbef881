use std::path::Path;

use chrono::{Datelike, Days, NaiveDate, Weekday};
use coresat::ingest::*;
use coresat::PipelineError;
use proptest::prelude::*;

fn date(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).unwrap()
}

fn read(text: &str) -> coresat::Result<RawPriceSeries> {
    read_price_csv(text.as_bytes(), Path::new("x.csv"), "X".into(), &CsvSchema::default())
}

fn series(start: NaiveDate, prices: &[f64]) -> RawPriceSeries {
    RawPriceSeries {
        asset_id: "X".into(),
        observations: prices
            .iter()
            .enumerate()
            .map(|(k, &p)| (start + Days::new(k as u64), p))
            .collect(),
    }
}

fn weekly(id: &str, values: &[Option<f64>]) -> WeeklySeries {
    WeeklySeries {
        asset_id: id.into(),
        values: values.to_vec(),
    }
}

fn grid_of(n: usize) -> WeekGrid {
    WeekGrid::new(date(2015, 1, 4), date(2015, 1, 4) + Days::new(7 * (n as u64 - 1)), Weekday::Sun).unwrap()
}

#[test]
fn rows_are_sorted_and_extra_columns_ignored() {
    let s = read("date,open,close\n2015-01-03,1,12.5\n2015-01-02,1,10\n").unwrap();
    assert_eq!(s.observations, vec![(date(2015, 1, 2), 10.0), (date(2015, 1, 3), 12.5)]);
}

#[test]
fn parse_errors_carry_line_numbers() {
    match read("date,close\n2015-01-02,10\n2015-13-02,11\n") {
        Err(PipelineError::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("{other:?}"),
    }
    match read("date,close\n2015-01-02,10\n2015-01-03,abc\n") {
        Err(PipelineError::Parse { line, message, .. }) => {
            assert_eq!(line, 3);
            assert!(message.contains("abc"));
        }
        other => panic!("{other:?}"),
    }
    assert!(matches!(read("day,close\n"), Err(PipelineError::Parse { line: 1, .. })));
}

#[test]
fn duplicate_date_is_rejected() {
    match read("date,close\n2015-01-02,10\n2015-01-03,11\n2015-01-02,12\n") {
        Err(PipelineError::DuplicateDate { date: d, line, .. }) => {
            assert_eq!(d, date(2015, 1, 2));
            assert_eq!(line, 4);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn non_positive_price_is_rejected() {
    assert!(matches!(
        read("date,close\n2015-01-02,10\n2015-01-03,0\n"),
        Err(PipelineError::NonPositivePrice { line: 3, .. })
    ));
    assert!(matches!(
        read("date,close\n2015-01-02,-1\n"),
        Err(PipelineError::NonPositivePrice { line: 2, .. })
    ));
}

#[test]
fn fx_carry_forward_over_weekend() {
    // Friday and Monday rates only
    let fx = read_fx_csv("date,rate\n2015-01-02,0.8\n2015-01-05,0.9\n".as_bytes(), Path::new("fx.csv")).unwrap();
    let s = series(date(2015, 1, 2), &[10.0, 20.0, 30.0, 40.0, 50.0]);
    let c = convert_currency(&s, &fx).unwrap();
    let expected = [8.0, 16.0, 24.0, 36.0, 45.0];
    for ((_, got), want) in c.observations.iter().zip(expected) {
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }
}

#[test]
fn fx_missing_before_first_rate() {
    let fx = read_fx_csv("date,rate\n2015-01-05,0.9\n".as_bytes(), Path::new("fx.csv")).unwrap();
    let s = series(date(2015, 1, 2), &[10.0]);
    assert!(matches!(
        convert_currency(&s, &fx),
        Err(PipelineError::NoFxRate { date: d, .. }) if d == date(2015, 1, 2)
    ));
}

#[test]
fn fourteen_days_give_two_weeks() {
    for offset in 0..7 {
        let s = series(date(2015, 1, 5) + Days::new(offset), &[1.0; 14]);
        let g = WeekGrid::spanning(&s, Weekday::Sun).unwrap();
        assert_eq!(resample_weekly(&s, &g).unwrap().values.len(), 2);
    }
}

#[test]
fn one_week_gives_one_point() {
    let s = series(date(2015, 1, 5), &[1.0; 7]);
    let g = WeekGrid::spanning(&s, Weekday::Sun).unwrap();
    assert_eq!(resample_weekly(&s, &g).unwrap().values, vec![Some(1.0)]);
}

#[test]
fn missing_anchor_day_uses_previous_close() {
    // ten days from Thursday 2015-01-01; Sunday 01-04 is absent
    let prices = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0];
    let mut s = series(date(2015, 1, 1), &prices);
    s.observations.retain(|(d, _)| *d != date(2015, 1, 4));
    let g = WeekGrid::new(date(2015, 1, 1), date(2015, 1, 11), Weekday::Sun).unwrap();
    assert_eq!(g.dates, vec![date(2015, 1, 4), date(2015, 1, 11)]);
    let w = resample_weekly(&s, &g).unwrap();
    // Saturday 01-10 stands in for the missing Sunday 01-11 as well
    assert_eq!(w.values, vec![Some(3.0), Some(10.0)]);
    // an empty week is a missing marker, not a stale carry
    let mut t = series(date(2015, 1, 1), &prices);
    t.observations.truncate(4);
    let w = resample_weekly(&t, &g).unwrap();
    assert_eq!(w.values, vec![Some(4.0), None]);
}

#[test]
fn three_week_gap_is_filled() {
    let g = grid_of(7);
    let rows = [weekly("A", &[Some(1.0), Some(2.0), None, None, None, Some(3.0), Some(4.0)])];
    let f = fill_gaps_locf(&rows, &g, 4).unwrap();
    assert!(f.exclusions.is_empty());
    assert_eq!(f.panel.prices[0], vec![1.0, 2.0, 2.0, 2.0, 2.0, 3.0, 4.0]);
}

#[test]
fn five_week_gap_excludes() {
    let g = grid_of(8);
    let mut v = vec![Some(1.0); 8];
    v[1..6].iter_mut().for_each(|x| *x = None);
    let rows = [weekly("A", &v), weekly("B", &[Some(2.0); 8])];
    let f = fill_gaps_locf(&rows, &g, 4).unwrap();
    assert_eq!(f.panel.assets, vec!["B".to_string()]);
    assert_eq!(
        f.exclusions,
        vec![Exclusion {
            asset_id: "A".into(),
            reason: ExclusionReason::Gap,
            gap_length: 5
        }]
    );
}

#[test]
fn missing_first_week_excludes() {
    let g = grid_of(3);
    let f = fill_gaps_locf(&[weekly("A", &[None, Some(1.0), Some(1.0)])], &g, 4).unwrap();
    assert_eq!(f.exclusions[0].reason, ExclusionReason::MissingAtStart);
    assert!(f.panel.assets.is_empty());
}

#[test]
fn log_returns_of_a_ten_percent_rise() {
    let panel = PricePanel {
        assets: vec!["A".into()],
        weeks: grid_of(2).dates,
        prices: vec![vec![100.0, 110.0]],
    };
    let r = log_returns(&panel).unwrap();
    assert!((r.returns[0][0] - 1.1f64.ln()).abs() < 1e-15);
    assert_eq!(r.weeks, vec![panel.weeks[1]]);
    let short = PricePanel {
        prices: vec![vec![100.0]],
        weeks: grid_of(1).dates,
        ..panel
    };
    assert!(log_returns(&short).is_err());
}

#[test]
fn partial_final_year_has_about_21_weeks() {
    let g = WeekGrid::new(date(2014, 1, 1), date(2019, 6, 1), Weekday::Sun).unwrap();
    let panel = PricePanel {
        assets: vec!["A".into()],
        weeks: g.dates.clone(),
        prices: vec![vec![1.0; g.len()]],
    };
    let years = log_returns(&panel).unwrap().week_years();
    let in_2019 = years.iter().filter(|&&y| y == 2019).count();
    // oracle: walk the calendar day by day
    let sundays = date(2019, 1, 1)
        .iter_days()
        .take_while(|d| *d <= date(2019, 6, 1))
        .filter(|d| d.weekday() == Weekday::Sun)
        .count();
    assert_eq!(in_2019, sundays);
    assert_eq!(in_2019, 21);
}

#[test]
fn weekday_names() {
    assert_eq!(parse_weekday("sunday").unwrap(), Weekday::Sun);
    assert_eq!(parse_weekday("Fri").unwrap(), Weekday::Fri);
    assert!(parse_weekday("someday").is_err());
}

proptest! {
    #[test]
    fn csv_round_trip(prices in prop::collection::vec(1e-6f64..1e6, 1..60), start in 0u64..3000) {
        let s = series(date(2012, 1, 1) + Days::new(start), &prices);
        let mut text = String::from("date,close\n");
        for (d, p) in &s.observations {
            text.push_str(&format!("{},{}\n", d.format(DATE_FORMAT), p));
        }
        let back = read(&text).unwrap();
        for ((d0, p0), (d1, p1)) in s.observations.iter().zip(&back.observations) {
            prop_assert_eq!(d0, d1);
            prop_assert!((p0 - p1).abs() <= 1e-12 * p0.abs());
        }
    }

    #[test]
    fn exclusion_is_monotone_in_max_gap(
        mask in prop::collection::vec(prop::bool::weighted(0.3), 2..40),
        gap in 0usize..6,
    ) {
        let mut v: Vec<Option<f64>> = mask.iter().map(|m| (!m).then_some(1.0)).collect();
        v[0] = Some(1.0);
        let g = grid_of(v.len());
        let rows = [weekly("A", &v)];
        let tight = fill_gaps_locf(&rows, &g, gap).unwrap();
        let loose = fill_gaps_locf(&rows, &g, gap + 1).unwrap();
        prop_assert!(loose.exclusions.len() <= tight.exclusions.len());
        if let Some(row) = tight.panel.prices.first() {
            prop_assert!(row.iter().all(|p| *p > 0.0));
        }
    }

    #[test]
    fn constant_fx_commutes_with_resampling(
        prices in prop::collection::vec(0.1f64..100.0, 7..60),
        rate in 0.1f64..10.0,
        drop in prop::collection::vec(any::<bool>(), 60),
    ) {
        let mut s = series(date(2016, 3, 1), &prices);
        let mut k = 0;
        s.observations.retain(|_| { k += 1; k == 1 || !drop[k - 1] });
        let fx = FxSeries { observations: vec![(date(2016, 1, 1), rate)] };
        let g = WeekGrid::spanning(&s, Weekday::Sun).unwrap();
        let a = resample_weekly(&convert_currency(&s, &fx).unwrap(), &g).unwrap();
        let b = resample_weekly(&s, &g).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            match (x, y) {
                (Some(x), Some(y)) => prop_assert!((x - y * rate).abs() <= 1e-12 * x.abs()),
                (None, None) => {}
                _ => prop_assert!(false, "missing markers differ"),
            }
        }
    }
}
