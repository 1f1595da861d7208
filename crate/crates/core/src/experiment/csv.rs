use std::fmt;
use std::io::{self, Write};

pub const HEADER: &str = "scenario,x_name,x_value,layer,quantity,value,stderr,slots,seed";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    AnalyticThroughput,
    SimulatedThroughput,
    BoundThroughput,
    AnalyticOutage,
    SimulatedOutage,
    CaptureExact,
    CaptureBound,
    PowerMean,
    BaselineIrsa,
    BaselineAloha,
}

impl Quantity {
    pub fn as_str(self) -> &'static str {
        match self {
            Quantity::AnalyticThroughput => "analytic_throughput",
            Quantity::SimulatedThroughput => "simulated_throughput",
            Quantity::BoundThroughput => "bound_throughput",
            Quantity::AnalyticOutage => "analytic_outage",
            Quantity::SimulatedOutage => "simulated_outage",
            Quantity::CaptureExact => "capture_exact",
            Quantity::CaptureBound => "capture_bound",
            Quantity::PowerMean => "power_mean",
            Quantity::BaselineIrsa => "baseline_irsa",
            Quantity::BaselineAloha => "baseline_aloha",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerTag {
    Layer(usize),
    Total,
}

impl fmt::Display for LayerTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LayerTag::Layer(l) => write!(f, "{l}"),
            LayerTag::Total => f.write_str("total"),
        }
    }
}

/// Monte Carlo metadata attached to simulated rows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimStat {
    pub stderr: f64,
    pub slots: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub scenario: String,
    pub x_name: &'static str,
    pub x_value: f64,
    pub layer: LayerTag,
    pub quantity: Quantity,
    pub value: f64,
    pub sim: Option<SimStat>,
}

impl Row {
    pub fn to_csv_line(&self) -> String {
        let (stderr, slots, seed) = match &self.sim {
            Some(s) => (format_sig9(s.stderr), s.slots.to_string(), s.seed.to_string()),
            None => (String::new(), String::new(), String::new()),
        };
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.scenario,
            self.x_name,
            format_sig9(self.x_value),
            self.layer,
            self.quantity.as_str(),
            format_sig9(self.value),
            stderr,
            slots,
            seed
        )
    }
}

/// Rows plus the `#` provenance lines written above the header.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    pub provenance: Vec<String>,
    pub rows: Vec<Row>,
}

impl Dataset {
    pub fn extend(&mut self, other: Dataset) {
        self.provenance.extend(other.provenance);
        self.rows.extend(other.rows);
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        for line in &self.provenance {
            writeln!(out, "# {line}")?;
        }
        writeln!(out, "{HEADER}")?;
        for row in &self.rows {
            writeln!(out, "{}", row.to_csv_line())?;
        }
        out.flush()
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV output is UTF-8")
    }

    /// Rows matching a series label, quantity and layer, in grid order.
    pub fn select(&self, scenario: &str, quantity: Quantity, layer: LayerTag) -> Vec<&Row> {
        self.rows
            .iter()
            .filter(|r| r.scenario == scenario && r.quantity == quantity && r.layer == layer)
            .collect()
    }
}

/// Formats like C's `%.9g`: 9 significant digits, trailing zeros removed,
/// scientific notation for exponents below −4 or above 8.
pub fn format_sig9(x: f64) -> String {
    const DIGITS: i32 = 9;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..DIGITS).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (DIGITS - 1 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig9_matches_printf_g() {
        // Expected strings are what printf("%.9g") produces.
        let cases = [
            (0.0, "0"),
            (1.0, "1"),
            (-2.5, "-2.5"),
            (2.23130160148429, "2.2313016"),
            (9.65, "9.65"),
            (0.367879441171442, "0.367879441"),
            (1.0e-5, "1e-05"),
            (1.234567891e-5, "1.23456789e-05"),
            (0.0001, "0.0001"),
            (123456789.0, "123456789"),
            (1234567890.0, "1.23456789e+09"),
            (9.9999999999, "10"),
            (f64::NAN, "nan"),
        ];
        for (x, want) in cases {
            assert_eq!(format_sig9(x), want, "formatting {x}");
        }
    }

    #[test]
    fn analytic_rows_leave_sim_columns_empty() {
        let row = Row {
            scenario: "s".into(),
            x_name: "arrival",
            x_value: 10.0,
            layer: LayerTag::Total,
            quantity: Quantity::AnalyticThroughput,
            value: 2.5,
            sim: None,
        };
        assert_eq!(row.to_csv_line(), "s,arrival,10,total,analytic_throughput,2.5,,,");
        let row = Row {
            layer: LayerTag::Layer(2),
            quantity: Quantity::SimulatedThroughput,
            sim: Some(SimStat {
                stderr: 0.01,
                slots: 100,
                seed: 7,
            }),
            ..row
        };
        assert_eq!(
            row.to_csv_line(),
            "s,arrival,10,2,simulated_throughput,2.5,0.01,100,7"
        );
    }
}
