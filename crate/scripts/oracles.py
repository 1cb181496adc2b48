"""Independent reference values for the frozen test expectations.

Run with `python3 scripts/oracles.py`. Uses only the standard library
and numpy/scipy; nothing here imports the Rust implementation.
"""
import math
import datetime as dt

R_E = 6371.0
MU = 398600.4418
R_EQ = 6378.137
J2 = 1.08263e-3
SIGMA = 5.67037e-8


def cell_area(lat_lo, lat_hi, lon_lo, lon_hi):
    return R_E**2 * math.radians(lon_hi - lon_lo) * (
        math.sin(math.radians(lat_hi)) - math.sin(math.radians(lat_lo)))


def sso_inclination(alt):
    a = R_EQ + alt
    rate = math.radians(360.0 / 365.2422) / 86400.0
    c = -rate * 2.0 * a**3.5 / (3.0 * J2 * math.sqrt(MU) * R_EQ**2)
    return math.degrees(math.acos(c))


def period(alt):
    a = R_EQ + alt
    return 2 * math.pi * math.sqrt(a**3 / MU)


def mean_sun_ra(when):
    j2000 = dt.datetime(2000, 1, 1, 12, tzinfo=dt.timezone.utc)
    d = (when - j2000).total_seconds() / 86400.0
    return (280.460 + 0.9856474 * d) % 360.0


def silverman(xs):
    import numpy as np
    xs = np.asarray(xs, float)
    sd = xs.std(ddof=1)
    iqr = np.percentile(xs, 75) - np.percentile(xs, 25)
    return 0.9 * min(sd, iqr / 1.34) * len(xs) ** -0.2


def l_cluster():
    # cells: (lat_lo, lat_hi, lon_lo, lon_hi) at 1 degree, centered mid-latitude
    cells = [(40, 41, -110, -109), (41, 42, -110, -109), (41, 42, -109, -108)]
    w = [cell_area(*c) for c in cells]
    lat = sum(wi * (c[0] + c[1]) / 2 for wi, c in zip(w, cells)) / sum(w)
    lon = sum(wi * (c[2] + c[3]) / 2 for wi, c in zip(w, cells)) / sum(w)
    return lat, lon


if __name__ == "__main__":
    print("cell_area equator 1x1", cell_area(-0.5, 0.5, 0, 1))
    print("cell_area ratio 60N", cell_area(59.5, 60.5, 0, 1) / cell_area(-0.5, 0.5, 0, 1))
    print("sigma T^4 220", SIGMA * 220**4, "300", SIGMA * 300**4)
    print("sso_inclination 700", sso_inclination(700), "800", sso_inclination(800))
    print("period 700", period(700), "0", period(0))
    epoch = dt.datetime(2005, 7, 15, tzinfo=dt.timezone.utc)
    ra = mean_sun_ra(epoch)
    print("mean sun RA 2005-07-15", ra, "raan ltan 20:00", (ra + 8 * 15) % 360)
    print("haversine quarter", math.pi * R_E / 2, "half", math.pi * R_E)
    print("silverman {0,1}", silverman([0, 1]))
    print("L cluster centroid", l_cluster())
    print("1x1 cell at (40.5,-109.5) area", cell_area(40, 41, -110, -109))
