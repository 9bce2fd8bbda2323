//! File-level round trips through the public API.

use volspill_core::panel::{
    load_price_panel, log_returns, range_volatility, write_price_panel, LoadOptions, PanelSchema, RangeVolatilityOptions,
};
use volspill_core::rolling::{rolling_spillover, RollingConfig};
use volspill_core::simulate::{prices_from_volatility, synthetic_volatility};
use volspill_core::stats::{descriptive_stats, AdfConfig};

#[test]
fn synthetic_panel_survives_disk_and_feeds_every_stage() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("prices.csv");
    let names: Vec<String> = ["ferrous", "precious", "energy"].iter().map(|s| s.to_string()).collect();
    let vol = synthetic_volatility(3, 300, 8, |_| 1.0).unwrap();
    let opts = RangeVolatilityOptions::default();
    let prices = prices_from_volatility(&vol, names.clone(), &opts, 9).unwrap();
    write_price_panel(&prices, &path).unwrap();

    let options = LoadOptions {
        schema: PanelSchema::Wide,
        ..LoadOptions::default()
    };
    let loaded = load_price_panel(&path, &options).unwrap();
    assert_eq!(loaded, prices);
    let returns = log_returns(&loaded).unwrap();
    let report = descriptive_stats(&returns, &AdfConfig::default()).unwrap();
    assert_eq!(report.series.len(), 3);

    let panel = range_volatility(&loaded, &opts).unwrap();
    assert!((panel.values() - &vol).amax() < 1e-9 * vol.amax());
    let config = RollingConfig {
        lag: 2,
        ..RollingConfig::default()
    };
    let series = rolling_spillover(&panel, &config).unwrap();
    assert_eq!(series.len(), 300 - 104 + 1);
    assert_eq!(series.dates.last(), panel.dates().last());
}
