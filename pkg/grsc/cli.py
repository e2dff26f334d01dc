#  Copyright (c) 2024 Thomas Holland
#
#  This work is licensed under the terms of the MIT license.
#  For a copy, see the accompanying LICENSE.txt file or
#  go to <https://opensource.org/licenses/MIT>.
#
"""
The ``grsc`` command line.

Exit codes: 0 everything verified, 1 a verification failed, 2 resource or budget exhaustion and
input errors.
"""
from __future__ import annotations

import logging
import shlex
import sys
from typing import TextIO, Optional, Any, List, Tuple, Dict

from argparsedecorator import ArgParseDecorator
from prompt_toolkit import PromptSession, HTML, print_formatted_text
from prompt_toolkit.completion import NestedCompleter
from prompt_toolkit.styles import Style

from grsc import fileformats
from grsc.cancel import check_gr_metric, check_gr_p, describe_path
from grsc.comerford import comerford_transform, relators_act_trivially
from grsc.config import GrscConfig
from grsc.core import LengthFunction, parse_word, format_word
from grsc.exceptions import GrscError, NotReducedError, LiftError, TraceError, ResourceLimitError, ConfigError
from grsc.pipeline import run_theorem_pipeline, export_dot
from grsc.ripssegev import search_coefficients, build_rips_segev, build_sets
from grsc.updcert import trace_product, verify_certificate, enumerate_relators

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_ERROR = 2

style = Style.from_dict({
    'error': 'red',
    'warn': 'orange',
    'info': 'grey',
    'ok': 'green',
})
"""
Styles usable as html tags, e.g. ``<error>An error message</error>``.
"""


def print_html(text: str, file: Optional[TextIO] = None) -> None:
    """
    Format and print text containing HTML tags.

    .. note::
        The prompt toolkit HTML to ANSI converter supports only a few basic HTML tags.

    :param text: A string that may have html tags. Interpolated values must already be escaped.
    :param file: output stream, the terminal by default.
    """
    print_formatted_text(HTML(text), style=style, file=file)


def _print_styled(tag: str, text: str, file: Optional[TextIO]) -> None:
    # HTML.format escapes the interpolated text
    print_formatted_text(HTML(f"<{tag}>{{}}</{tag}>").format(text), style=style, file=file)


def print_error(text: str, file: Optional[TextIO] = None) -> None:
    """Print an error message, red by default. ``text`` is escaped."""
    _print_styled("error", text, file)


def print_warn(text: str, file: Optional[TextIO] = None) -> None:
    """Print a warning message, orange by default. ``text`` is escaped."""
    _print_styled("warn", text, file)


def print_info(text: str, file: Optional[TextIO] = None) -> None:
    """Print an info message, grey by default. ``text`` is escaped."""
    _print_styled("info", text, file)


def print_ok(text: str, file: Optional[TextIO] = None) -> None:
    """Print a success message, green by default. ``text`` is escaped."""
    _print_styled("ok", text, file)


class Console:
    """Where the commands write to. Tests replace :attr:`stdout` with a StringIO."""

    def __init__(self, stdout: Optional[TextIO] = None):
        self.stdout: TextIO = stdout or sys.stdout
        self.parse_failed = False

    def write(self, text: str) -> None:
        self.stdout.write(text)

    def ok(self, text: str) -> None:
        print_ok(text, file=self.stdout)

    def info(self, text: str) -> None:
        print_info(text, file=self.stdout)

    def warn(self, text: str) -> None:
        print_warn(text, file=self.stdout)

    def error(self, text: str) -> None:
        print_error(text, file=self.stdout)

    def error_handler(self, exc: Exception) -> None:
        """Prints parser error messages in the <error> style."""
        self.parse_failed = True
        self.error(str(exc))


cli = ArgParseDecorator()
"""The :class:`~argparsedecorator.ArgParseDecorator` holding all commands."""

console = Console()

intro = "\ngrsc interactive shell.\nType 'exit' or Ctrl-D to leave.\n"

prompt = "\n<green>grsc&gt; </green>"

COMMAND_ALIASES = {"verify-cert": "verifycert", "export-dot": "exportdot"}


def _config(**values: Any) -> GrscConfig:
    # unset flags keep the defaults
    return GrscConfig(**{key: value for key, value in values.items() if value is not None})


def _search_options(strategy: Optional[str], skeleton: Optional[str], girth: Optional[int], n: Optional[int],
                    c: Optional[int]) -> Dict[str, Any]:
    return dict(search_strategy=strategy, search_skeleton=skeleton, search_girth=girth,
                search_n_min=n, search_n_max=n, search_c_max=c)


@cli.command
def generate(a: str, b: str, __seed: int = None, __budget: int = None, __ratio: str = None,
             __length: str = None, __workers: int = None, __certificate: str = None,
             _o: str = None, __graph: str = None, __strategy: str = None, __skeleton: str = None,
             __girth: int = None, __n: int = None, __c: int = None) -> int:
    """
    Search a coefficient system for the words a and b.
    :param a: the word a, e.g. 's^2'.
    :param b: the word b, e.g. 't^2'.
    :param __seed: random seed.
    :param __budget: number of candidates.
    :param __ratio: the λ of the metric condition, e.g. 1/6.
    :param __length: 'free_product' or 'word'.
    :param __workers: worker threads.
    :param __certificate: 'no' to accept candidates without product certificate.
    :param _o: write the coefficient system to this file.
    :param __graph: write the graph to this file.
    :param __strategy: 'skeleton' or 'random'.
    :param __skeleton: 'regular' or 'circulant'.
    :param __girth: smallest girth of the line/chain incidence graph.
    :param __n: search only systems with this many lines.
    :param __c: largest line length.
    """
    cfg = _config(ratio=__ratio, length=__length, workers=__workers, require_certificate=__certificate,
                  **_search_options(__strategy, __skeleton, __girth, __n, __c))
    result = search_coefficients(parse_word(a), parse_word(b), __budget, __seed, cfg)
    if not result.found:
        console.warn(f"no coefficient system found within {result.candidates} candidates")
        console.info(f"rejections: {result.rejections}")
        return EXIT_ERROR
    cs = result.cs
    console.ok(f"found after {result.candidates} candidates: N={cs.n} C={list(cs.c)}")
    console.info(f"{result.verdict.describe()} satisfied, {len(result.rsg.graph.vertices)} vertices, "
                 f"{len(result.rsg.graph.edges)} edges")
    if _o:
        fileformats.save_coefficients(cs, _o)
    else:
        console.write(fileformats.coefficient_format.dumps(cs))
    if __graph:
        fileformats.save_graph(result.rsg.graph, __graph)
    return EXIT_OK


@cli.command
def check(graph: str, __ratio: str = None, __length: str = None, __p: int = None,
          __cycle_cap: int = None, __workers: int = None, _o: str = None) -> int:
    """
    Verify a small cancellation condition.
    With --p the Gr(p) condition is checked, otherwise the metric condition.
    :param graph: graph file.
    :param __ratio: the λ of the metric condition.
    :param __length: 'free_product' or 'word'.
    :param __p: check Gr(p).
    :param __cycle_cap: maximal number of simple cycles for Gr(p).
    :param __workers: worker threads.
    :param _o: write the verdict to this file.
    """
    cfg = _config(ratio=__ratio, length=__length, pieces_p=__p, cycle_cap=__cycle_cap, workers=__workers)
    labelled = fileformats.load_graph(graph)
    try:
        if __p is not None:
            verdict = check_gr_p(labelled, cfg.pieces_p, cfg.cycle_cap, workers=cfg.workers)
        else:
            length = LengthFunction.from_name(cfg.length, labelled.alphabet)
            verdict = check_gr_metric(labelled, cfg.ratio, length, workers=cfg.workers)
    except NotReducedError as exc:
        console.error(f"not reduced: {exc}")
        return EXIT_FAILED
    if _o:
        fileformats.save_verdict(verdict, _o)
    if verdict.satisfied:
        console.ok(f"{verdict.describe()} satisfied ({verdict.checked} checked)")
        return EXIT_OK
    console.error(f"{verdict.describe()} violated, {len(verdict.violations)} violations")
    for violation in verdict.violations[:10]:
        if violation.piece is not None:
            console.info(f"piece {describe_path(labelled, violation.piece)} in cycle "
                         f"{describe_path(labelled, violation.cycle)}")
        else:
            console.info(f"cycle {describe_path(labelled, violation.cycle)} is {violation.pieces} pieces")
    return EXIT_FAILED


@cli.command
def comerford(__graph: str, __action: str, _o: str = None, __cycle_cap: int = None,
              __workers: int = None) -> int:
    """
    Build Γ_H for the subgroup given by a coset action.
    :param __graph: graph file.
    :param __action: action file.
    :param _o: write Γ_H to this file.
    :param __cycle_cap: maximal number of cycles used to test the relators.
    :param __workers: worker threads.
    """
    cfg = _config(cycle_cap=__cycle_cap, workers=__workers)
    labelled = fileformats.load_graph(__graph)
    action = fileformats.load_action(__action)
    trivial, exhaustive = relators_act_trivially(action, enumerate_relators(labelled, cfg.cycle_cap))
    if not trivial:
        console.error("a relator does not act trivially on the cosets")
        return EXIT_FAILED
    if not exhaustive:
        console.warn(f"only the relators of the first {cfg.cycle_cap} cycles were tested")
    try:
        gamma_h = comerford_transform(labelled, action, workers=cfg.workers)
    except (LiftError, NotReducedError) as exc:
        console.error(str(exc))
        return EXIT_FAILED
    console.ok(f"Γ_H: {len(gamma_h.graph.vertices)} vertices, {len(gamma_h.graph.edges)} edges, "
               f"free rank {gamma_h.free_rank}")
    if _o:
        fileformats.save_graph(gamma_h.graph, _o)
    else:
        console.write(fileformats.graph_format.dumps(gamma_h.graph))
    return EXIT_OK


@cli.command
def trace(coefficients: str, a: str, b: str) -> int:
    """
    Trace the product a·b from u_{1,0} in a Rips-Segev graph and print the path.
    :param coefficients: coefficient system file.
    :param a: element of A.
    :param b: element of B.
    """
    cs = fileformats.load_coefficients(coefficients)
    rsg = build_rips_segev(cs)
    try:
        witness = trace_product(rsg, parse_word(a), parse_word(b))
    except TraceError as exc:
        console.error(str(exc))
        return EXIT_FAILED
    console.write(f"{witness.path}\n")
    console.info(f"{format_word(witness.a_elem)} * {format_word(witness.b_elem)} ends at vertex "
                 f"{witness.endvertex}")
    return EXIT_OK


@cli.command
def verifycert(graph: str, certificate: str, __coefficients: str = None) -> int:
    """
    Re-check a product certificate against a graph.
    :param graph: graph file.
    :param certificate: certificate file.
    :param __coefficients: coefficient file, to also check that all of A×B is covered.
    """
    labelled = fileformats.load_graph(graph)
    cert = fileformats.load_certificate(certificate)
    sets = None
    if __coefficients:
        cs = fileformats.load_coefficients(__coefficients)
        sets = build_sets(cs, build_rips_segev(cs))
    result = verify_certificate(labelled, cert, sets)
    if result.ok:
        console.ok(f"certificate verified: {result.witnesses} witnesses in {result.buckets} buckets")
        return EXIT_OK
    for problem in result.problems:
        console.error(problem)
    return EXIT_FAILED


@cli.command
def exportdot(graph: str, _o: str = None) -> int:
    """
    Write a graph in Graphviz DOT syntax.
    :param graph: graph file.
    :param _o: output file, stdout by default.
    """
    labelled = fileformats.load_graph(graph)
    if _o:
        export_dot(labelled, _o)
    else:
        console.write(export_dot(labelled))
    return EXIT_OK


@cli.command
def pipeline(__k: int = 2, __seed: int = None, __budget: int = None, _o: str = None,
             __ratio: str = None, __length: str = None, __workers: int = None,
             __allow_large_k: str = None, __strategy: str = None, __skeleton: str = None,
             __girth: int = None, __n: int = None, __c: int = None, __cycles: int = None) -> int:
    """
    Run the whole construction for k and certify every subgroup of index at most k.
    :param __k: the k.
    :param __seed: search seed.
    :param __budget: search budget.
    :param _o: output directory.
    :param __ratio: the λ of the metric condition.
    :param __length: 'free_product' or 'word'.
    :param __workers: worker threads.
    :param __allow_large_k: 'yes' to run above the desk-scale cap.
    :param __strategy: 'skeleton' or 'random'.
    :param __skeleton: 'regular' or 'circulant'.
    :param __girth: smallest girth of the line/chain incidence graph.
    :param __n: search only systems with this many lines.
    :param __c: largest line length.
    :param __cycles: maximal number of simple cycles enumerated per graph.
    """
    cfg = _config(ratio=__ratio, length=__length, workers=__workers, allow_large_k=__allow_large_k,
                  cycle_cap=__cycles, **_search_options(__strategy, __skeleton, __girth, __n, __c))
    try:
        report = run_theorem_pipeline(__k, __seed, __budget, _o, cfg)
    except ConfigError as exc:
        console.error(str(exc))
        return EXIT_ERROR
    for record in report.subgroups:
        text = f"{record.name}: {record.action}"
        if record.failure:
            console.error(f"{text}: {record.failure}")
        elif record.non_unique_product:
            console.ok(f"{text}: non-unique-product")
        else:
            console.info(f"{text}: checks passed")
    if not report.hypotheses_met:
        console.warn("ratio and length do not meet the small cancellation hypotheses")
    message = f"pipeline {report.status}"
    if report.exit_code == EXIT_OK:
        console.ok(message)
    else:
        console.error(message)
    return report.exit_code


@cli.command
def shell() -> int:
    """
    Start an interactive shell with command completion.
    """
    prompt_session = PromptSession()
    completer = NestedCompleter.from_nested_dict(cli.command_dict)
    print_formatted_text(HTML(intro), file=console.stdout)
    while True:
        try:
            command = prompt_session.prompt(HTML(prompt), completer=completer)
        except (EOFError, KeyboardInterrupt):
            break
        command = command.strip()
        if command in ("exit", "quit"):
            break
        if command and command.split()[0] != "shell":
            execute(command)
    return EXIT_OK


def _normalize(cmdline: str) -> str:
    name, _, rest = cmdline.partition(" ")
    return f"{COMMAND_ALIASES.get(name, name)} {rest}".strip()


def execute(cmdline: str) -> int:
    """
    Execute one command line and map the outcome to an exit code.
    """
    console.parse_failed = False
    try:
        result = cli.execute(_normalize(cmdline), error_handler=console.error_handler, stdout=console.stdout)
    except SystemExit as exc:
        # argparse exits after --help
        return EXIT_OK if not exc.code else EXIT_ERROR
    except ResourceLimitError as exc:
        console.error(f"resource limit: {exc}")
        return EXIT_ERROR
    except (GrscError, OSError) as exc:
        console.error(str(exc))
        return EXIT_ERROR
    except Exception as exc:
        logger.exception(exc)
        return EXIT_ERROR
    if console.parse_failed:
        return EXIT_ERROR
    return result if isinstance(result, int) else EXIT_OK


def _split_loglevel(argv: List[str]) -> Tuple[str, List[str]]:
    level = "WARNING"
    rest = []
    iterator = iter(argv)
    for arg in iterator:
        if arg == "--loglevel":
            level = next(iterator, level)
        elif arg.startswith("--loglevel="):
            level = arg.split("=", 1)[1]
        else:
            rest.append(arg)
    return level.upper(), rest


def main(argv: Optional[List[str]] = None, stdout: Optional[TextIO] = None) -> int:
    """
    Entry point of the ``grsc`` console script.

    :param argv: arguments without the program name, ``sys.argv[1:]`` by default.
    :param stdout: output stream, for tests.
    :return: the exit code.
    """
    if argv is None:
        argv = sys.argv[1:]
    level, argv = _split_loglevel(list(argv))
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    console.stdout = stdout or sys.stdout
    if not argv:
        console.error("no command given, try 'help'")
        return EXIT_ERROR
    return execute(shlex.join(argv))


if __name__ == "__main__":
    sys.exit(main())
