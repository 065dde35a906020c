"""Small helpers: metrics, latency statistics, label parsing and formatting."""
