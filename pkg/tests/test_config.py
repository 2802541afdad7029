from g2endo.config import Settings, load_settings, override


def test_defaults_without_file(tmp_path):
    assert load_settings(str(tmp_path / 'absent.ini')) == Settings()


def test_ini_values(tmp_path):
    path = tmp_path / 'g2endo.ini'
    path.write_text(
        "[bounds]\n"
        "b_irred = 31\n"
        "factor_cap = 1e20\n"
        "[numeric]\n"
        "tolerance = 1e-30\n"
        "[paths]\n"
        "data_dir = /srv/g2endo\n"
    )
    settings = load_settings(str(path))
    assert settings.b_irred == 31
    assert settings.factor_cap == 10 ** 20
    assert settings.tolerance == 1e-30
    assert settings.data_dir == '/srv/g2endo'
    assert settings.b_disc == Settings().b_disc


def test_override_ignores_none():
    settings = override(Settings(), b_irred=None, b_disc=97, log_file=None)
    assert settings.b_irred == 59
    assert settings.b_disc == 97
    assert settings.log_file == 'g2endo.log'
