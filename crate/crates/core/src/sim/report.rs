use std::fmt;

/// Memory-traffic counters of one launch (element granularity).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TrafficCounts {
    pub global_loads: u64,
    pub global_stores: u64,
    pub local_loads: u64,
    pub local_stores: u64,
    pub barriers_executed: u64,
}

/// Counters plus the coalescing verdict of a simulated launch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TrafficReport {
    pub global_loads: u64,
    pub global_stores: u64,
    pub local_loads: u64,
    pub local_stores: u64,
    pub barriers_executed: u64,
    pub coalesced: bool,
    pub worst_stride_elements: u64,
}

/// Stable field order of the key=value block and the CSV row.
pub const TRAFFIC_FIELDS: [&str; 7] = [
    "global_loads",
    "global_stores",
    "local_loads",
    "local_stores",
    "barriers_executed",
    "coalesced",
    "worst_stride_elements",
];

impl TrafficReport {
    pub fn from_parts(counts: TrafficCounts, coalescing: Coalescing) -> Self {
        Self {
            global_loads: counts.global_loads,
            global_stores: counts.global_stores,
            local_loads: counts.local_loads,
            local_stores: counts.local_stores,
            barriers_executed: counts.barriers_executed,
            coalesced: coalescing.coalesced,
            worst_stride_elements: coalescing.worst_stride_elements,
        }
    }

    pub fn counts(&self) -> TrafficCounts {
        TrafficCounts {
            global_loads: self.global_loads,
            global_stores: self.global_stores,
            local_loads: self.local_loads,
            local_stores: self.local_stores,
            barriers_executed: self.barriers_executed,
        }
    }

    fn values(&self) -> [String; 7] {
        [
            self.global_loads.to_string(),
            self.global_stores.to_string(),
            self.local_loads.to_string(),
            self.local_stores.to_string(),
            self.barriers_executed.to_string(),
            self.coalesced.to_string(),
            self.worst_stride_elements.to_string(),
        ]
    }

    /// One `key=value` line per field.
    pub fn to_key_value(&self) -> String {
        TRAFFIC_FIELDS
            .iter()
            .zip(self.values())
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect()
    }

    pub fn csv_header() -> String {
        TRAFFIC_FIELDS.join(",")
    }

    pub fn to_csv_row(&self) -> String {
        self.values().join(",")
    }

    /// Parses the output of [`to_key_value`](Self::to_key_value).
    pub fn from_key_value(text: &str) -> Result<Self, String> {
        let mut r = TrafficReport::default();
        let mut seen = [false; 7];
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| format!("missing `=` in `{line}`"))?;
            let idx = TRAFFIC_FIELDS
                .iter()
                .position(|f| *f == k.trim())
                .ok_or_else(|| format!("unknown field `{k}`"))?;
            let v = v.trim();
            let num = || {
                v.parse::<u64>()
                    .map_err(|_| format!("bad value for {k}: `{v}`"))
            };
            match idx {
                0 => r.global_loads = num()?,
                1 => r.global_stores = num()?,
                2 => r.local_loads = num()?,
                3 => r.local_stores = num()?,
                4 => r.barriers_executed = num()?,
                5 => r.coalesced = v.parse().map_err(|_| format!("bad bool `{v}`"))?,
                _ => r.worst_stride_elements = num()?,
            }
            seen[idx] = true;
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(format!("missing field `{}`", TRAFFIC_FIELDS[i]));
        }
        Ok(r)
    }
}

impl fmt::Display for TrafficReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_key_value())
    }
}

/// Result of stride analysis over all global access sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Coalescing {
    pub coalesced: bool,
    pub worst_stride_elements: u64,
}
