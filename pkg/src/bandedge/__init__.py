"""Band structure, DOS and local DOS of 1D layered photonic crystals near band edges."""
from .asymptotics import (AsymptoticFit, PowerLawRegressor, SensitivityReport, edge_exponent_dos,
                          edge_exponent_ldos, fit_exponent, sensitivity_scan)
from .crystal import Layer, LayeredCrystal, build_crystal, permittivity_at, quarter_wave_stack
from .emission import EmitterDistribution, MixtureDistribution, se_rate, se_rate_average
from .ldos import BlochMode, bloch_mode, edge_mode, ldos, ldos_histogram_oracle, mode_nodes
from .models import AnisotropicModel, IsotropicModel, anisotropic_dos, isotropic_dos
from .spectrum import Band, BandEdge, band_edges, dispersion, dos, find_bands, gap_edges
from .transfer import bloch_trace, bloch_trace_derivative, cell_matrix, layer_matrix, propagate_to

__version__ = "0.1.0"
