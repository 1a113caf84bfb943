"""Frustrated saw-tooth Josephson chains as long-range XX spin chains.

The pipeline runs circuit -> variational mapping -> spin chain -> observables:

    params = CircuitParams(alpha=-0.8, gamma=1.0, ej_over_ec=80, n_cells=12)
    spec, model = derive_chain_from_circuit(params)
    eig = lowest_two(spec)
    obs = observables_for(spec, eig)
"""

from .circuit import (CircuitParams, InteractionKernel, SingleCellDerived,
                      gamma_of_k, interaction_kernel, potential_energy,
                      single_cell_derived)
from .observables import (CrossingReport, ObservableSet, correlation_length,
                          fss_crossings, gap_of, magnetization_x,
                          observables_for, structure_factor)
from .spinchain import (ChainSpec, ConvergenceError, EigenResult, SpinBasis,
                        apply_hamiltonian, dense_matrix, full_spectrum,
                        lowest_two, parity_apply, reflect_state)
from .sweep import SweepPlan, derive_chain_from_circuit, run_sweep
from .variational import (HigherOrderAmplitude, SpinModelParams,
                          VariationalSolution, enumerate_cluster_amplitudes,
                          exchange_couplings, higher_order_log_amplitude,
                          single_block_amplitudes, solve_variational,
                          tunneling_amplitude, wkb_amplitude)

__version__ = "0.1.0"
