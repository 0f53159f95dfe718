import click
from flask import current_app
from flask.cli import FlaskGroup, with_appcontext

from app import db
from app.dynamics.basin import estimate_basin_fraction
from app.dynamics.errors import DynamicsError
from app.dynamics.flow import integrate, itinerary
from app.dynamics.game_core import GameState, PayoffParams, SimplexPoint, nash_point
from app.dynamics.network import CYCLES
from app.dynamics.sweeps import MIN_RESOLUTION, run_region_sweep
from app.utils.db import record_run
from app.utils.formatting import (
    csv_text,
    dump_json,
    write_csv,
    write_itinerary_csv,
    write_trajectory_csv,
)
from app.utils.payloads import (
    INDEX_PATHS,
    index_csv_header,
    index_rows,
    indices_payload,
    maps_payload,
    network_payload,
)

REGION_CSV_HEADER = ['eps_x', 'eps_y', 'C0', 'C1', 'C2', 'C3', 'C4']

IO_ERROR_EXIT = 3

TIE_PAYOFF = click.FloatRange(-1.0, 1.0, min_open=True, max_open=True)
CYCLE_CHOICE = click.Choice(list(CYCLES), case_sensitive=False)
CYCLES_OR_ALL = click.Choice(list(CYCLES) + ['all'], case_sensitive=False)


class SimplexParamType(click.ParamType):
    """Mixed strategy given as three comma separated probabilities."""

    name = 'simplex'

    def convert(self, value, param, ctx):
        if isinstance(value, SimplexPoint):
            return value
        try:
            coords = [float(part) for part in str(value).split(',')]
        except ValueError:
            self.fail(f"{value!r} is not a comma separated list of numbers", param, ctx)
        if len(coords) != 3:
            self.fail(f"expected 3 probabilities, got {len(coords)}", param, ctx)
        try:
            return SimplexPoint(*coords)
        except DynamicsError as e:
            self.fail(str(e), param, ctx)


SIMPLEX = SimplexParamType()


def tie_payoff_options(func):
    func = click.option('--eps-y', type=TIE_PAYOFF, default=0.0, show_default=True,
                        help='Tie payoff of player Y')(func)
    func = click.option('--eps-x', type=TIE_PAYOFF, default=0.0, show_default=True,
                        help='Tie payoff of player X')(func)
    return func


def _emit_json(payload, output):
    try:
        text = dump_json(payload, output)
    except OSError as e:
        _io_failure(output, e)
    if output is None:
        click.echo(text, nl=False)
    else:
        click.echo(f"Wrote {output}", err=True)


def _io_failure(path, error):
    current_app.logger.error("Could not write %s: %s", path, error)
    click.echo(f"Error: could not write '{path}': {error}", err=True)
    raise SystemExit(IO_ERROR_EXIT)


def _emit_csv(header, rows, output):
    if output is None:
        click.echo(csv_text(header, rows), nl=False)
        return
    try:
        write_csv(output, header, rows)
    except OSError as e:
        _io_failure(output, e)
    click.echo(f"Wrote {output}", err=True)


def _cycles_option(cycles):
    """Upper-cased cycle ids; no ids or ``all`` selects every cycle."""
    chosen = [c.upper() for c in cycles]
    if not chosen or 'ALL' in chosen:
        return list(CYCLES)
    return chosen


def _save(kind, parameters, summary):
    run = record_run(kind, parameters, summary)
    if run is None:
        click.echo("Warning: run record could not be saved", err=True)
    else:
        click.echo(f"Saved run {run.id}", err=True)


def register_cli_commands(app):
    """Register CLI commands for the application"""

    @app.cli.command('init-db')
    @with_appcontext
    def init_db():
        """Create the tables used to record analysis runs"""
        db.create_all()
        click.echo("Database initialization complete!")

    @app.cli.command()
    @tie_payoff_options
    @click.option('--output', '-o', type=click.Path(dir_okay=False), help='JSON file (default: stdout)')
    @with_appcontext
    def network(eps_x, eps_y, output):
        """Describe the quotient network and its eigenvalue tables"""
        _emit_json(network_payload(PayoffParams(eps_x, eps_y)), output)

    @app.cli.command()
    @tie_payoff_options
    @click.option('--cycle', 'cycles', type=CYCLES_OR_ALL, multiple=True,
                  help='Cycle id or "all" (repeatable; default all)')
    @click.option('--output', '-o', type=click.Path(dir_okay=False), help='JSON file (default: stdout)')
    @with_appcontext
    def maps(eps_x, eps_y, cycles, output):
        """Basic and composite transition matrices"""
        _emit_json(maps_payload(PayoffParams(eps_x, eps_y), _cycles_option(cycles)), output)

    @app.cli.command()
    @tie_payoff_options
    @click.option('--cycle', 'cycles', type=CYCLES_OR_ALL, multiple=True,
                  help='Cycle id or "all" (repeatable; default all)')
    @click.option('--path', type=click.Choice(INDEX_PATHS), default='closed', show_default=True,
                  help='Closed-form formulas, transition matrices, or both')
    @click.option('--band', type=click.FloatRange(min=0.0), default=None, help='Boundary band')
    @click.option('--format', 'fmt', type=click.Choice(['json', 'csv']), default='json', show_default=True,
                  help='JSON document or one CSV row per cycle node')
    @click.option('--output', '-o', type=click.Path(dir_okay=False), help='Output file (default: stdout)')
    @click.option('--save', is_flag=True, help='Record the run in the database')
    @with_appcontext
    def indices(eps_x, eps_y, cycles, path, band, fmt, output, save):
        """Stability indices and classification of each cycle"""
        band = current_app.config['BOUNDARY_BAND'] if band is None else band
        params = PayoffParams(eps_x, eps_y)
        cycle_ids = _cycles_option(cycles)
        try:
            if fmt == 'csv':
                rows = index_rows(params, cycle_ids, path, band)
                summary = {row[0]: row[-1] for row in rows}
            else:
                payload = indices_payload(params, cycle_ids, path, band)
                summary = {r['cycle']: r['classification'] for r in payload['results']}
        except DynamicsError as e:
            raise click.UsageError(str(e))
        if fmt == 'csv':
            _emit_csv(index_csv_header(path), rows, output)
        else:
            _emit_json(payload, output)
        if save:
            _save('indices', {'eps_x': eps_x, 'eps_y': eps_y, 'path': path, 'band': band}, summary)

    @app.cli.command()
    @click.option('--resolution', type=click.IntRange(min=MIN_RESOLUTION), default=None,
                  help='Grid cells per axis (default from REGION_RESOLUTION)')
    @click.option('--band', type=click.FloatRange(min=0.0), default=None, help='Boundary band')
    @click.option('--workers', type=click.IntRange(min=1), default=None, help='Worker processes')
    @click.option('--output', '-o', type=click.Path(dir_okay=False), help='CSV file (default: stdout)')
    @click.option('--save', is_flag=True, help='Record the run in the database')
    @with_appcontext
    def regions(resolution, band, workers, output, save):
        """Classify every cycle over a grid of tie payoffs (CSV)"""
        config = current_app.config
        resolution = resolution or config['REGION_RESOLUTION']
        band = config['BOUNDARY_BAND'] if band is None else band
        workers = workers or config['SWEEP_WORKERS']
        grid = run_region_sweep(resolution, band=band, workers=workers)
        _emit_csv(REGION_CSV_HEADER, grid.rows(), output)
        if save:
            _save('regions', {'resolution': resolution, 'band': band}, grid.counts())

    @app.cli.command()
    @click.option('--x', 'x', type=SIMPLEX, default=None, help='Initial strategy of X, e.g. 0.98,0.01,0.01')
    @click.option('--y', 'y', type=SIMPLEX, default=None, help='Initial strategy of Y')
    @tie_payoff_options
    @click.option('--t-max', type=click.FloatRange(min=0.0, min_open=True), default=100.0, show_default=True)
    @click.option('--dt', type=click.FloatRange(min=0.0, min_open=True), default=None,
                  help='Step size (default from INTEGRATOR_DT)')
    @click.option('--every', type=click.IntRange(min=1), default=1, show_default=True,
                  help='Write every n-th step')
    @click.option('--near-threshold', type=click.FloatRange(0.0, 0.5, min_open=True, max_open=True),
                  default=None, help='Vertex neighbourhood radius (default from NEAR_THRESHOLD)')
    @click.option('--out', 'out', type=click.Path(dir_okay=False), required=True, help='Trajectory CSV')
    @click.option('--itinerary-out', type=click.Path(dir_okay=False), default=None,
                  help='Itinerary CSV (default: <out>.itinerary.csv)')
    @with_appcontext
    def simulate(x, y, eps_x, eps_y, t_max, dt, every, near_threshold, out, itinerary_out):
        """Integrate one trajectory and write it with its itinerary"""
        config = current_app.config
        dt = dt or config['INTEGRATOR_DT']
        near_threshold = near_threshold or config['NEAR_THRESHOLD']
        nash = nash_point()
        initial = GameState(x or nash.x, y or nash.y)
        try:
            trajectory = integrate(initial, PayoffParams(eps_x, eps_y), t_max, dt, record_every=every)
        except DynamicsError as e:
            raise click.UsageError(str(e))
        visits = itinerary(trajectory, near_threshold)
        itinerary_out = itinerary_out or f"{out}.itinerary.csv"
        for path, writer, data in ((out, write_trajectory_csv, trajectory),
                                   (itinerary_out, write_itinerary_csv, visits)):
            try:
                writer(path, data)
            except OSError as e:
                _io_failure(path, e)
        click.echo(f"Wrote {len(trajectory)} states to {out} and {len(visits)} visits to {itinerary_out}",
                   err=True)

    @app.cli.command()
    @click.option('--cycle', type=CYCLE_CHOICE, required=True)
    @tie_payoff_options
    @click.option('--delta', type=click.FloatRange(0.0, 0.2, min_open=True, max_open=True), default=None,
                  help='Seeding distance (default from BASIN_DELTA)')
    @click.option('--samples', type=click.IntRange(min=100), default=None,
                  help='Number of initial states (default from BASIN_SAMPLES)')
    @click.option('--horizon', type=click.FloatRange(min=0.0, min_open=True), default=None,
                  help='Integration time per sample (default from BASIN_HORIZON)')
    @click.option('--seed', type=click.IntRange(0, 2 ** 64 - 1), default=None,
                  help='RNG seed (default from BASIN_SEED)')
    @click.option('--dt', type=click.FloatRange(min=0.0, min_open=True), default=None,
                  help='Step size (default from BASIN_DT)')
    @click.option('--output', '-o', type=click.Path(dir_okay=False), help='JSON file (default: stdout)')
    @click.option('--save', is_flag=True, help='Record the run in the database')
    @with_appcontext
    def basin(cycle, eps_x, eps_y, delta, samples, horizon, seed, dt, output, save):
        """Monte Carlo estimate of the fraction of nearby states a cycle attracts"""
        config = current_app.config
        options = {
            'delta': config['BASIN_DELTA'] if delta is None else delta,
            'samples': samples or config['BASIN_SAMPLES'],
            'horizon': horizon or config['BASIN_HORIZON'],
            'seed': config['BASIN_SEED'] if seed is None else seed,
            'dt': dt or config['BASIN_DT'],
        }
        try:
            estimate = estimate_basin_fraction(cycle.upper(), PayoffParams(eps_x, eps_y), **options)
        except DynamicsError as e:
            raise click.UsageError(str(e))
        payload = estimate.to_dict()
        _emit_json(payload, output)
        if save:
            _save('basin', {'cycle': cycle.upper(), 'eps_x': eps_x, 'eps_y': eps_y, **options},
                  {'converged': estimate.converged, 'fraction': estimate.fraction})


def _create_app(*args, **kwargs):
    from app import create_app

    # Console commands skip the production SECRET_KEY check
    return create_app({'REQUIRE_SECRET_KEY': False})


main = FlaskGroup(create_app=_create_app, help='Stability analysis of Rock-Scissors-Paper heteroclinic cycles')
