"""fieldnet: digit recognition with electrostatically determined weights.

Binarized images act as planes of point charges; a sensor plane between
two image planes samples summed Coulomb potentials, and those potentials
become the weights and thresholds of a pairwise-tournament classifier —
no training loop involved.

Hot loops run in a compiled Cython extension when available, with a
NumPy fallback selected at import (override with ``FIELDNET_BACKEND``).
"""

from .backends import HAVE_COMPILED, active_backend
from .errors import (ArchiveError, BuildError, ConfigMismatchError,
                     DatasetError, FieldNetError, IdxFormatError,
                     SelectionError)
from .field import (DistanceKernel, PhysicalConfig, build_kernel,
                    charge_sensor_distance, pair_weight_table,
                    potential_table, potential_table_fast, table_to_csv,
                    table_to_pgm)
from .harness import (EvalReport, ReferenceSpec, evaluate,
                      references_from_spec, select_references, sweep)
from .mnist_io import (BinaryImage, DatasetIndex, binarize, load_idx_images,
                       load_idx_labels, parse_name, resolve_name)
from .network import (REJECTED, ForwardTrace, Network, PairNeuron,
                      add_reference, build_network, classify,
                      compute_threshold, first_layer_fire, forward_trace,
                      load_network, neuron_state, save_network, second_layer,
                      third_layer, zero_layer_table)

__version__ = "0.1.0"

__all__ = [
    "ArchiveError", "BinaryImage", "BuildError", "ConfigMismatchError",
    "DatasetError", "DatasetIndex", "DistanceKernel", "EvalReport",
    "FieldNetError", "ForwardTrace", "HAVE_COMPILED", "IdxFormatError",
    "Network", "PairNeuron", "PhysicalConfig", "REJECTED", "ReferenceSpec",
    "SelectionError", "active_backend", "add_reference", "binarize",
    "build_kernel", "build_network", "charge_sensor_distance", "classify",
    "compute_threshold", "evaluate", "first_layer_fire", "forward_trace",
    "load_idx_images", "load_idx_labels", "load_network", "neuron_state",
    "pair_weight_table", "parse_name", "potential_table",
    "potential_table_fast", "references_from_spec", "resolve_name",
    "save_network", "second_layer", "select_references", "sweep",
    "table_to_csv", "table_to_pgm", "third_layer", "zero_layer_table",
]
