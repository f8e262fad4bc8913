from .gamefile import load_game_file, parse_game_file
from .main import main
