#  Copyright (c) 2024 Thomas Holland
#
#  This work is licensed under the terms of the MIT license.
#  For a copy, see the accompanying LICENSE.txt file or
#  go to <https://opensource.org/licenses/MIT>.
#
from grsc.exceptions import GrscError
from grsc.core import Alphabet, Word, Letter, Edge, Path, PathStep, Direction, LabelledGraph, LengthFunction, \
    parse_word, format_word, path_label, is_reduced_labelling, word_length, free_product_length
from grsc.config import GrscConfig
from grsc.cancel import check_gr_metric, check_gr_p, enumerate_piece_paths, label_automorphisms, \
    ConditionVerdict
from grsc.updcert import Certificate, build_certificate, verify_certificate, dehn_reduce, check_injectivity
from grsc.ripssegev import CoefficientSystem, RSGraph, Skeleton, build_rips_segev, build_sets, search_coefficients, \
    circulant_skeleton, regular_skeleton, golomb_rulers
from grsc.comerford import CosetAction, GammaH, action_from_permutations, enumerate_index_h_actions, \
    schreier_graph, lift_labelling, comerford_transform, piece_projection_check
from grsc.pipeline import RunReport, run_theorem_pipeline, lifted_period_words, export_dot
