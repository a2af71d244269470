import argparse
import json
import logging
import sys
from io import StringIO
from typing import Any, Callable

from pydantic import BaseModel, ValidationError

from app.classes.exceptions import ConfigError, ScvError
from app.classes.reports import ExperimentConfig
from app.config import Config
from app.services.experiments import ExperimentService, write_sweep_csv

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2


# --- Parseo de valores ---
def parse_range(text: str, kind: Callable[[str], Any] = int) -> list:
    """'3..6' -> [3, 4, 5, 6]; '3,5,9' -> [3, 5, 9]; '' -> []"""
    text = text.strip()
    if not text:
        return []
    try:
        if ".." in text:
            low, high = text.split("..", 1)
            return list(range(int(low), int(high) + 1))
        return [kind(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"Error: rango mal formado '{text}'.")


def parse_value(text: str) -> Any:
    """Valores de key=value: entero, real, rango o texto."""
    if ".." in text or "," in text:
        return parse_range(text, _number)
    return _number(text)


def _number(text: str) -> Any:
    for kind in (int, float):
        try:
            return kind(text)
        except ValueError:
            continue
    return text


def parse_params(tokens: list[str] | None) -> dict[str, Any]:
    params = {}
    for token in tokens or []:
        key, sep, value = token.partition("=")
        if not sep or not key:
            raise ConfigError(f"Error: parámetro '{token}' debe tener la forma clave=valor.")
        params[key.replace("-", "_")] = parse_value(value)
    return params


def parse_positions(text: str | None) -> list[list[float]] | None:
    if text is None:
        return None
    try:
        values = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"Error: --positions no es JSON válido: {e}")
    if not isinstance(values, list):
        raise ConfigError("Error: --positions debe ser una lista.")
    # Una lista de números es un perfil 1-D
    return [[v] if isinstance(v, (int, float)) else v for v in values]


# --- Parser ---
def _add_instance_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--instance", help="Instancia predefinida: line3, line4, simplex, multi4")
    parser.add_argument("--instance-file", help="Instancia en JSON (dimension, candidates, actions, positions)")
    parser.add_argument("--mechanism", help="Id del mecanismo")
    parser.add_argument("--n", help="Número de votantes (en sweep admite rangos: 3..6 o 3,5,9)")
    parser.add_argument("--sigma", help="sigma de line4 (en sweep admite listas)")
    parser.add_argument("--r", help="r de las instancias símplex (en sweep admite listas)")
    parser.add_argument("--m", type=int, help="Número de candidatos de la instancia símplex")
    parser.add_argument("--seed", type=int, default=Config.SEED)
    parser.add_argument("--grid-step", type=float)
    parser.add_argument("--out", help="Fichero de salida (por defecto stdout)")
    parser.add_argument("--format", choices=["csv", "json"])
    parser.add_argument("--param", action="append", help="Parámetro del mecanismo, clave=valor (repetible)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="scv", description="Mecanismos scv de dos ganadores: ejecución y verificación")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="Ejecuta un mecanismo sobre una elección")
    _add_instance_flags(run)
    run.add_argument("--actions", help="Acciones 1-based separadas por comas, p. ej. 1,2,3 (con --instance-file, en el orden del archivo)")
    run.add_argument("--positions", help="Posiciones en JSON, p. ej. '[-1, 0, 2]' o '[[1,0,0],[0,1,0]]'")

    check_sp = commands.add_parser("check-sp", help="Comprueba strategy-proofness")
    _add_instance_flags(check_sp)

    distortion = commands.add_parser("distortion", help="Búsqueda adversaria de distorsión")
    _add_instance_flags(distortion)

    reproduce = commands.add_parser("reproduce", help="Reproduce un resultado por id")
    reproduce.add_argument("claim_id")
    reproduce.add_argument("params", nargs="*", help="Parámetros clave=valor")
    reproduce.add_argument("--out")
    reproduce.add_argument("--format", choices=["json"])

    sweep = commands.add_parser("sweep", help="Barrido de parámetros a CSV/JSON")
    _add_instance_flags(sweep)
    sweep.add_argument("--timing", action="store_true", help="Mide runtime_ms (la salida deja de ser reproducible)")
    return parser


def _scalar(value: str | None, kind: Callable[[str], Any]) -> Any:
    if value is None:
        return None
    try:
        return kind(value)
    except ValueError:
        raise ConfigError(f"Error: valor '{value}' no válido.")


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    data: dict[str, Any] = {"command": args.command, "out": args.out}
    if args.format:
        data["format"] = args.format
    elif args.command == "sweep":
        data["format"] = "csv"

    if args.command == "reproduce":
        data["claim_id"] = args.claim_id
        data["params"] = parse_params(args.params)
        return ExperimentConfig(**data)

    data.update(
        instance=args.instance,
        instance_file=args.instance_file,
        mechanism=args.mechanism,
        m=args.m,
        seed=args.seed,
        grid_step=args.grid_step,
        params=parse_params(args.param),
    )
    if args.command == "sweep":
        data.update(
            n_values=parse_range(args.n or ""),
            sigma_values=parse_range(args.sigma or "", float),
            r_values=parse_range(args.r or "", float),
            timing=args.timing,
        )
    else:
        data.update(n=_scalar(args.n, int), sigma=_scalar(args.sigma, float), r=_scalar(args.r, float))
    if args.command == "run":
        data["actions"] = parse_range(args.actions) if args.actions else None
        data["positions"] = parse_positions(args.positions)
    return ExperimentConfig(**data)


# --- Ejecución ---
def _dump(payload: Any) -> str:
    if isinstance(payload, BaseModel):
        payload = payload.model_dump()
    elif isinstance(payload, list):
        payload = [p.model_dump() if isinstance(p, BaseModel) else p for p in payload]
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def execute(service: ExperimentService, config: ExperimentConfig) -> tuple[int, str, str]:
    """Runs the command; returns (exit status, output text, one-line summary)."""
    if config.format == "csv" and config.command != "sweep":
        raise ConfigError("Error: el formato csv solo está disponible para sweep.")

    if config.command == "run":
        result = service.run(config)
        ratio = f", ratio {result.ratio:.12g}" if result.ratio is not None else ""
        return EXIT_OK, _dump(result), f"{result.mechanism}: {result.outcome}{ratio}"

    if config.command == "check-sp":
        report = service.check_sp(config)
        status = EXIT_OK if report.passed and not report.truncated else EXIT_FAILED
        truncated = " (truncado)" if report.truncated else ""
        return status, _dump(report), f"{report.mechanism}@{report.instance}: {report.violation_count} violaciones{truncated}"

    if config.command == "distortion":
        report = service.distortion(config)
        return EXIT_OK, _dump(report), f"{report.mechanism}@{report.instance} n={report.n}: ratio {report.best_ratio:.12g}"

    if config.command == "reproduce":
        result = service.reproduce(config)
        label = "PASS" if result.passed else "FAIL"
        summary = f"[{label}] {result.claim_id}: esperado {result.expected}; observado {result.observed}"
        return (EXIT_OK if result.passed else EXIT_FAILED), _dump(result), summary

    rows = service.sweep(config)
    if config.format == "csv":
        buffer = StringIO()
        write_sweep_csv(rows, buffer)
        text = buffer.getvalue()
    else:
        text = _dump(rows)
    return EXIT_OK, text, f"{len(rows)} filas"


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
        status, text, summary = execute(ExperimentService(), config)
    except (ScvError, ValidationError) as e:
        logger.error(f"{args.command}: {e}")
        print(str(e), file=sys.stderr)
        return EXIT_USAGE

    if config.out:
        with open(config.out, "w", encoding="utf-8", newline="") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
    print(summary, file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
