"""p-adic automata: automaton functions on Z_p, transitivity checks and plots."""

__version__ = "0.1.0"

from .errors import GuardError, IncompatibleRingsError, PrecisionError
from .padic import (INDISTINGUISHABLE, PadicInt, distance, format_padic, from_integer,
                    from_rational, parse_padic, pow_exp, valuation)
from .words import Word, all_words, concat, nu, omega, residue_word, word_residue
from .expr import (FuncExpr, check_lipschitz, const, differentiate, eval_array, eval_mod,
                   expc, poly, x)
from .grammar import ExprSyntaxError, parse_expr
from .automaton import (AutomatonFunction, ConstantAutomaton, FiniteAutomaton,
                        FunctionAutomaton, adding_machine, build_from_function,
                        compose_serial, constant_automaton, export_dot, load_machine,
                        reachable_states, run)
from .transitivity import (check_absolute_transitive, check_complete_transitive,
                           complete_transitivity_witness, ergodic_form,
                           is_n_word_transitive, poly_word_transitive_z2, recheck_witness,
                           sufficient_condition_certificate, word_transitive_up_to)
from .plot import (PlotGrid, classify, generate_points, mirror_check, occupancy,
                   occupancy_trend, render)
