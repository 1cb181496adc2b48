//! ISO-8601 conversion for [`Instant`].

use chrono::DateTime;
use eosample_core::Instant;

/// Parses an RFC 3339 UTC timestamp such as `2005-07-15T00:00:00Z`.
pub fn parse_instant(s: &str) -> Result<Instant, String> {
    let dt = DateTime::parse_from_rfc3339(s).map_err(|e| format!("bad timestamp {s:?}: {e}"))?;
    if dt.timestamp_subsec_nanos() != 0 {
        return Err(format!("timestamp {s:?} has sub-second precision"));
    }
    Ok(Instant::from_unix(dt.timestamp()))
}

pub fn format_instant(t: Instant) -> String {
    t.to_string()
}
