//! UTC instants as whole seconds since the Unix epoch.
//!
//! Leap seconds are ignored; UT1 is taken equal to UTC. Both are far below
//! the resolution that matters for 30-minute ground-track sampling.

use core::fmt;
use core::ops::{Add, Sub};

/// Seconds per day.
pub const DAY: i64 = 86_400;

/// Julian date of the Unix epoch, 1970-01-01T00:00:00Z.
const JD_UNIX_EPOCH: f64 = 2_440_587.5;

/// Julian date of J2000.0 (2000-01-01T12:00:00).
pub const JD_J2000: f64 = 2_451_545.0;

/// A UTC instant with one-second resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Instant(i64);

impl Instant {
    pub const fn from_unix(seconds: i64) -> Self {
        Self(seconds)
    }

    pub const fn unix(self) -> i64 {
        self.0
    }

    /// Builds an instant from a proleptic Gregorian civil date and time.
    pub fn from_civil(year: i32, month: u32, day: u32, hour: u32, minute: u32, second: u32) -> Self {
        let days = days_from_civil(year, month, day);
        Self(days * DAY + i64::from(hour) * 3600 + i64::from(minute) * 60 + i64::from(second))
    }

    /// Splits into `(year, month, day, hour, minute, second)`.
    pub fn to_civil(self) -> (i32, u32, u32, u32, u32, u32) {
        let days = self.0.div_euclid(DAY);
        let secs = self.0.rem_euclid(DAY);
        let (y, m, d) = civil_from_days(days);
        (y, m, d, (secs / 3600) as u32, ((secs % 3600) / 60) as u32, (secs % 60) as u32)
    }

    pub fn julian_date(self) -> f64 {
        JD_UNIX_EPOCH + self.0 as f64 / DAY as f64
    }

    /// Days since J2000.0.
    pub fn days_since_j2000(self) -> f64 {
        // Split to keep precision: whole days first, then the fractional part.
        let whole = (JD_UNIX_EPOCH - JD_J2000) + self.0.div_euclid(DAY) as f64;
        whole + self.0.rem_euclid(DAY) as f64 / DAY as f64
    }

    /// UTC hour of day in `[0, 24)`.
    pub fn utc_hours(self) -> f64 {
        self.0.rem_euclid(DAY) as f64 / 3600.0
    }

    /// Mean local solar time in hours `[0, 24)` at the given east longitude.
    pub fn local_solar_hours(self, lon_deg: f64) -> f64 {
        let h = self.utc_hours() + lon_deg / 15.0;
        let w = h - 24.0 * libm::floor(h / 24.0);
        if w >= 24.0 {
            0.0
        } else {
            w
        }
    }
}

impl Add<i64> for Instant {
    type Output = Instant;
    fn add(self, rhs: i64) -> Instant {
        Instant(self.0 + rhs)
    }
}

impl Sub<i64> for Instant {
    type Output = Instant;
    fn sub(self, rhs: i64) -> Instant {
        Instant(self.0 - rhs)
    }
}

impl Sub for Instant {
    type Output = i64;
    fn sub(self, rhs: Instant) -> i64 {
        self.0 - rhs.0
    }
}

/// ISO-8601 `YYYY-MM-DDTHH:MM:SSZ`.
impl fmt::Display for Instant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (y, mo, d, h, mi, s) = self.to_civil();
        write!(f, "{y:04}-{mo:02}-{d:02}T{h:02}:{mi:02}:{s:02}Z")
    }
}

// Howard Hinnant's days_from_civil / civil_from_days.
fn days_from_civil(y: i32, m: u32, d: u32) -> i64 {
    let y = i64::from(y) - i64::from(m <= 2);
    let era = y.div_euclid(400);
    let yoe = y - era * 400;
    let m = i64::from(m);
    let doy = (153 * (if m > 2 { m - 3 } else { m + 9 }) + 2) / 5 + i64::from(d) - 1;
    let doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    era * 146_097 + doe - 719_468
}

fn civil_from_days(z: i64) -> (i32, u32, u32) {
    let z = z + 719_468;
    let era = z.div_euclid(146_097);
    let doe = z - era * 146_097;
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let d = (doy - (153 * mp + 2) / 5 + 1) as u32;
    let m = if mp < 10 { mp + 3 } else { mp - 9 } as u32;
    let y = yoe + era * 400 + i64::from(m <= 2);
    (y as i32, m, d)
}
