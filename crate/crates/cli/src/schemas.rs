//! JSON schemas for every document the CLI prints.

pub const SCHEMAS: &[(&str, &str)] = &[
    ("run_report", include_str!("../schemas/run_report.json")),
    ("local_bound", include_str!("../schemas/local_bound.json")),
    ("membership", include_str!("../schemas/membership.json")),
    ("ghz_arm", include_str!("../schemas/ghz_arm.json")),
    (
        "ghz_signaling",
        include_str!("../schemas/ghz_signaling.json"),
    ),
    ("speed_scan", include_str!("../schemas/speed_scan.json")),
    (
        "detection_report",
        include_str!("../schemas/detection_report.json"),
    ),
    (
        "delayed_outcome",
        include_str!("../schemas/delayed_outcome.json"),
    ),
    ("error", include_str!("../schemas/error.json")),
];

pub fn get(name: &str) -> Option<&'static str> {
    SCHEMAS.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}
