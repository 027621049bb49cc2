"""Hierarchical Archimax copulas: sampling, distribution functions and densities.

The building blocks are

* ``generators`` and ``frailty``: Archimedean generators and (nested) frailties,
* ``stdf`` and ``dnorm``: stable tail dependence functions and the random
  vectors (d-norm generators) that produce them,
* ``evc``: extreme-value copula samplers,
* ``archimax``: Archimax, hierarchical and nested Archimax copulas,
* ``density``: Archimax densities,
* ``validation``: rank statistics used to check samples,
* ``model`` and ``cli``: JSON model specifications and the ``haxc`` command.
"""
from .archimax import (cdf_axc, pairwise_margin_cdf, sample_axc, sample_haxc,
                       sample_naxc_nested_frailties)
from .density import axc_density, axc_log_density, enumerate_partitions
from .dnorm import mc_stdf
from .errors import CapabilityError, ConfigError, DomainError, NumericalError, StructureError
from .evc import evc_cdf, sample_evc, sample_maxstable
from .generators import Clayton, Gumbel, IndependenceExp
from .hierarchy import HierarchyTree, Node
from .model import CopulaModel
from .stdf import eval_stdf, partial_stdf
from .validation import empirical_cdf, kendall_tau, ks_uniform, tau_matrix

__version__ = "0.1.0"
