# Copyright 2022 InstaDeep Ltd. All rights reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Command line entry point: `downlink gen|solve|validate|experiment`."""
import argparse
import logging
import os
import sys
from typing import Dict, List, Optional, Sequence

from colorama import Fore, Style
from hydra import compose, initialize_config_module
from hydra.errors import HydraException
from omegaconf import OmegaConf
from omegaconf.errors import OmegaConfBaseException

from downlink.errors import ConfigError, GenerationError, InstanceParseError
from downlink.experiment import ExperimentSpec, run_sweep
from downlink.schedule import validate_schedule
from downlink.systems.de_nsga2 import run_experiment
from downlink.utils.dumps import load_schedule
from downlink.utils.instance_io import load_instance, save_instance
from downlink.utils.logger_tools import get_python_logger
from downlink.utils.make_instance import make

EXIT_OK = 0
EXIT_VIOLATIONS = 1
EXIT_GENERATION = 2
EXIT_CONFIG = 3

logger = logging.getLogger(__name__)


def compose_config(config_name: str, overrides: Sequence[str]) -> Dict:
    """Compose a packaged hydra config and resolve it into a plain dict."""
    with initialize_config_module(config_module="downlink.configs", version_base="1.2"):
        cfg = compose(config_name=config_name, overrides=list(overrides))
    return OmegaConf.to_container(cfg, resolve=True)  # type: ignore[return-value]


def _list(values: str) -> str:
    return "[" + ",".join(v.strip() for v in values.split(",") if v.strip()) + "]"


def flag_overrides(args: argparse.Namespace) -> List[str]:
    """Translate command line flags into hydra overrides. Trailing overrides come last."""
    overrides = []
    if getattr(args, "kind", None):
        overrides.append(f"problem={args.kind.lower()}")
    simple = {
        "n": "problem.n_oid",
        "strategy": "problem.strategy",
        "instance": "problem.instance_path",
        "vtws": "problem.vtws_path",
        "ir": "system.ir",
        "mr": "system.mr",
        "pop": "system.pop_size",
        "archive": "system.archive_size",
        "iters": "system.max_iter",
        "selection": "system.selection",
    }
    for flag, key in simple.items():
        value = getattr(args, flag, None)
        if value is not None:
            overrides.append(f"{key}={value}")
    if getattr(args, "seed", None) is not None:
        key = "problem.seed" if args.command == "gen" else "system.seed"
        overrides.append(f"{key}={args.seed}")
    if getattr(args, "ref", None):
        overrides.append(f"arch.ref_point={_list(args.ref)}")
    if args.command in ("solve", "experiment") and args.out:
        overrides.append(f"arch.output_dir={args.out}")
    if getattr(args, "axis", None):
        overrides.append(f"experiment={args.axis}")
    if getattr(args, "values", None):
        overrides.append(f"experiment.values={_list(args.values)}")
    if getattr(args, "seeds", None):
        overrides.append(f"experiment.seeds={_list(args.seeds)}")
    return overrides + list(args.overrides)


def cmd_gen(args: argparse.Namespace) -> int:
    config = compose_config("default_de_nsga2", flag_overrides(args))
    problem = config["problem"]
    instance = make(config)
    out = args.out or f"{problem['kind']}-{problem['n_oid']}-s{problem['seed']}.json"
    save_instance(instance, out)
    logger.info(
        f"{Fore.GREEN}{Style.BRIGHT}Wrote {out}: {len(instance.oids)} OIDs, "
        f"{len(instance.vtws)} windows{Style.RESET_ALL}"
    )
    return EXIT_OK


def cmd_solve(args: argparse.Namespace) -> int:
    config_name = "default_de_crem" if args.selection == "crem" else "default_de_nsga2"
    config = compose_config(config_name, flag_overrides(args))
    if not config["arch"].get("output_dir"):
        config["arch"]["output_dir"] = os.path.join("results", "solve")
    run_experiment(config)
    logger.info(
        f"{Fore.CYAN}{Style.BRIGHT}Results written to "
        f"{config['arch']['output_dir']}{Style.RESET_ALL}"
    )
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    instance = load_instance(args.instance)
    schedule, problem = load_schedule(args.schedule, instance)
    violations = validate_schedule(schedule, problem)
    for v in violations:
        print(f"{v.kind.value}: {v.detail}")
    if violations:
        logger.info(f"{Fore.RED}{Style.BRIGHT}{len(violations)} violation(s){Style.RESET_ALL}")
        return EXIT_VIOLATIONS
    logger.info(f"{Fore.GREEN}{Style.BRIGHT}Schedule is feasible{Style.RESET_ALL}")
    return EXIT_OK


def cmd_experiment(args: argparse.Namespace) -> int:
    config = compose_config("default_experiment", flag_overrides(args))
    spec = ExperimentSpec.from_config(config)
    tables = run_sweep(spec)
    logger.info(
        f"{Fore.CYAN}{Style.BRIGHT}Experiment summary ({spec.output_dir}):\n"
        f"{tables['summary'].to_string(index=False)}{Style.RESET_ALL}"
    )
    return EXIT_OK


def _add_problem_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--kind", choices=["ND", "PD", "MD"], help="Instance family.")
    parser.add_argument("--n", type=int, help="Number of OIDs to generate.")
    parser.add_argument("--seed", type=int, help="Generation seed (gen) or run seed.")
    parser.add_argument("--instance", help="Instance file to load instead of generating one.")
    parser.add_argument("--vtws", help="Externally computed windows replacing the generated ones.")


def _add_solver_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--strategy", choices=["min", "stoch", "none"])
    parser.add_argument("--ir", type=float, help="Insert rate.")
    parser.add_argument("--mr", type=float, help="Mutation and swap rate.")
    parser.add_argument("--pop", type=int, help="Population size.")
    parser.add_argument("--archive", type=int, help="Archive size.")
    parser.add_argument("--iters", type=int, help="Number of iterations.")
    parser.add_argument("--selection", choices=["nsga2", "crem"])
    parser.add_argument("--ref", help="Hypervolume reference point, e.g. 1,1.")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="downlink", description="Satellite image data downlink scheduling."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="Generate a benchmark instance.")
    _add_problem_flags(gen)
    gen.add_argument("--out", help="Instance file to write.")
    gen.set_defaults(handler=cmd_gen)

    solve = sub.add_parser("solve", help="Run the evolutionary solver on one instance.")
    _add_problem_flags(solve)
    _add_solver_flags(solve)
    solve.add_argument("--out", help="Result directory.")
    solve.set_defaults(handler=cmd_solve)

    validate = sub.add_parser("validate", help="Check a schedule against its instance.")
    validate.add_argument("--instance", required=True)
    validate.add_argument("--schedule", required=True)
    validate.set_defaults(handler=cmd_validate, overrides=[])

    experiment = sub.add_parser("experiment", help="Sweep one parameter over several seeds.")
    _add_problem_flags(experiment)
    _add_solver_flags(experiment)
    experiment.add_argument(
        "--axis", choices=["ir", "mr", "strategy", "selection", "reorder"], help="Sweep axis."
    )
    experiment.add_argument("--values", help="Comma separated sweep values.")
    experiment.add_argument("--seeds", help="Comma separated seeds.")
    experiment.add_argument("--out", help="Result directory.")
    experiment.set_defaults(handler=cmd_experiment)

    for p in (gen, solve, experiment):
        p.add_argument("overrides", nargs="*", help="Hydra overrides, e.g. system.box_grid=50.")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    get_python_logger()
    try:
        return int(args.handler(args))
    except GenerationError as e:
        logger.error(f"{Fore.RED}Generation failed: {e}{Style.RESET_ALL}")
        return EXIT_GENERATION
    except InstanceParseError as e:
        logger.error(f"{Fore.RED}Invalid input file: {e}{Style.RESET_ALL}")
        return EXIT_GENERATION
    except (ConfigError, HydraException, OmegaConfBaseException) as e:
        logger.error(f"{Fore.RED}Invalid configuration: {e}{Style.RESET_ALL}")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
