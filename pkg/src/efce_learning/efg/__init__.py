from .games import UnknownGameError, goofspiel, kuhn, load_game, micro, parse_game_spec, sheriff
from .sequence_form import (
    PerfectRecallError,
    PlayerTreeIndex,
    Treeplex,
    best_response,
    build_index,
    expected_utilities,
    game_indices,
    is_sequence_form,
    sequence_form_violation,
    utility_gradient,
    utility_gradients,
)
from .tree import CHANCE, GameTree, InvalidGameError, Node, build_game

__all__ = [
    "CHANCE", "GameTree", "InvalidGameError", "Node", "PerfectRecallError", "PlayerTreeIndex",
    "Treeplex", "UnknownGameError", "best_response", "build_game", "build_index",
    "expected_utilities", "game_indices", "goofspiel", "is_sequence_form", "kuhn", "load_game",
    "micro", "parse_game_spec", "sequence_form_violation", "sheriff", "utility_gradient",
    "utility_gradients",
]
