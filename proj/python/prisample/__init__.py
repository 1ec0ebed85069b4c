"""Priority sampling master samples, playout and Horvitz-Thompson estimates."""

from ._core import (
    Error,
    MasterSample,
    Record,
    Sample,
    build_master,
    extend,
    generate_links,
    generate_nodes,
    ks_cdf,
    ks_mass,
    mass_distribution,
    ordinary_cdf,
    read_records,
    run_eval,
    sample,
    spearman,
    subset_count,
    subset_sum,
    true_cdf,
    true_mass,
    write_records,
)

__all__ = [
    "Error",
    "MasterSample",
    "Record",
    "Sample",
    "build_master",
    "extend",
    "generate_links",
    "generate_nodes",
    "ks_cdf",
    "ks_mass",
    "mass_distribution",
    "ordinary_cdf",
    "read_records",
    "run_eval",
    "sample",
    "spearman",
    "subset_count",
    "subset_sum",
    "true_cdf",
    "true_mass",
    "write_records",
]
