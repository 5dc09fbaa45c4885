"""Rank-based analysis of the dependence between two continuous variables.

Typical use::

    from rankdep import load_csv, IngestOptions, analyze
    sample = load_csv("data.csv", IngestOptions(x_column="a", y_column="b"))
    result = analyze(sample)
    print(result.summary.rho_n, result.summary.sigma_n, result.category.label)
"""
from rankdep.analysis import (AnalysisOptions, DependenceAnalysis, DependenceSummary,
                              GluingAnalysis, RankPlotCategory, analyze, band_mass, classify,
                              detect_crossings, glue_scan, split_at, summarize_dependence)
from rankdep.core import (DiagonalCurves, EmpiricalCopula, MeasurePair, copula_value,
                          diagonal_sections, empirical_copula, independence_permutation_test,
                          measures, pearson_r, schweizer_wolff, spearman_rho)
from rankdep.errors import (ColumnNotFoundError, DataError, InvariantViolation,
                            ModelSpecError, RankDepError, TieError)
from rankdep.ingest import BivariateSample, IngestOptions, load_csv, subsample
from rankdep.kernels import BACKEND
from rankdep.models import (ConvexCombo, Frank, Glued, Kumaraswamy, LowerBound, Mixture,
                            NoisyLineMixture, Normal, Pareto, Product, StudentT, Uniform,
                            UpperBound, copula_cdf, marginal_quantile, mixture_simulator,
                            parse_copula, parse_marginal, sample_copula, simulate_bivariate)
from rankdep.ranks import (PseudoObservations, TiePolicy, ecdf, empirical_quantile,
                           rank_transform)
from rankdep.render import (BoxStats, DplotConfig, DplotDocument, HistogramSpec,
                            boxplot_stats, histogram, render_dplot)
from rankdep.report import build_report, write_report
from rankdep.rng import make_rng, split_rngs

__version__ = "0.1.0"
