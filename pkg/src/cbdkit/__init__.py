"""Contextuality-by-Default analysis of content-context systems.

Systems with non-measurements as first-class values, exact coupling
programs for the contextuality decision and its measures, a small language
for connections defined as functions of other connections, and the
consistification rewrite.
"""
from .coupling import (CouplingWitness, analysis_report, build_noncontextuality_program,
                       cnt1, contextual_fraction, coupling_unique, is_contextual,
                       max_equality_probability, noncontextual_coupling)
from .errors import (CbdError, DomainError, EvaluationError, SizeCapError,
                     ValidationError)
from .funcdsl import (ConnectionFunction, FunctionSyntaxError, evaluate_in_context,
                      format_function, parse_function, satisfies_empty_propagation)
from .lp import LinearProgram, LpOutcome, LpStatus, lp_feasible, lp_optimize
from .system import (NOMEAS, System, fill_deterministic, is_consistently_connected,
                     is_strongly_consistently_connected, load_system, save_system,
                     strip_deterministic, subsystem, validate_system)
from .testkit import (deterministic_assignment_oracle, paper_example,
                      random_cyclic_system)
from .transforms import add_connection, consistify, remove_connection, verify_function

__version__ = "0.1.0"
