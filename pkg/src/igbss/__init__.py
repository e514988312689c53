"""Blind source separation with a log-linear model on a layered poset."""
from .datagen import (MixingSpec, RescaleRecord, gen_images_mixture, gen_mixing, gen_pointcloud,
                      gen_timeseries, mix)
from .loglinear import (EmpiricalDistribution, FisherBlock, LogLinearState, NormalizationRecord,
                        compute_eta, compute_p, empirical_distribution, fisher_block, kl_divergence,
                        kl_gradient)
from .optimizer import (FitConfig, FitReport, Method, OptimizationError, fit, fit_step_gd,
                        fit_step_ng)
from .pipeline import (SeparationResult, evaluate, match_permutation, minmax_rows, rmse, separate,
                       snr_db)
from .poset import (BOTTOM, Layer, SampleSpace, StateId, build_sample_space, mixing, received,
                    source)

__version__ = "0.1.0"
