if __name__ == "__main__":
    from sipdg.cli_app import main
    main()
