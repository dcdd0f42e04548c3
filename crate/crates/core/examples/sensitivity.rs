//! Local sensitivity of the calibrated parameters to each target moment, and
//! how far ΔGini moves when a single target shifts by one standard error.

use twochannel::calib::{calibrate, sensitivity, CalibConfig};
use twochannel::{FixedEnv, MomentVector, StructuralParams};

fn main() -> twochannel::Result<()> {
    let env = FixedEnv::default();
    let targets = MomentVector::published_targets();
    let cfg = CalibConfig::default();
    let fit = calibrate(&targets, &env, &cfg)?;
    let sens = sensitivity(&fit.theta_hat, &targets, &env, cfg.fd_step)?;

    print!("{:<8}", "");
    for name in MomentVector::NAMES {
        print!("{:>12}", &name[..name.len().min(11)]);
    }
    println!("\nelasticity of each parameter to each moment");
    for (j, name) in StructuralParams::NAMES.iter().enumerate() {
        print!("{name:<8}");
        for v in sens.elasticities[j] {
            print!("{v:>12.3}");
        }
        println!();
    }
    print!("\n{:<8}", "dG/1SE");
    for v in sens.boundary {
        print!("{v:>12.5}");
    }
    println!("\n\ndirect dGini derivatives at the fit");
    let names = StructuralParams::NAMES.iter().chain(std::iter::once(&"xi"));
    for ((name, d), e) in names.zip(sens.direct).zip(sens.direct_elasticities) {
        println!("  {name:<7} {d:>+10.5}  elasticity {e:>+8.3}");
    }
    Ok(())
}
